#pragma once

#include <functional>

#include "emsk/boruvka.hpp"

namespace emsk {

// Forest peeling order: each extracted forest must be deleted from every
// later layer before that layer is queried. The logarithmic schedule
// groups layers into blocks and batches deletions so each block pass
// covers a power-of-two run of blocks; naive deletes every forest from
// every later layer immediately.
enum class DeletionSchedule { logarithmic, naive };

struct KconnEvent {
    enum class Kind { deletion, query } kind = Kind::query;
    u32 layer = 0;              // target layer
    std::vector<EdgeKey> edges; // deletion payload, empty for queries
};

struct KconnConfig {
    u64 block_forests = 0; // layers per schedule block; 0 picks ceil(log2 V)^2
    DeletionSchedule schedule = DeletionSchedule::logarithmic;
    std::function<void(const KconnEvent&)> observer;
};

struct ForestEdge {
    u64 u = 0, v = 0;
    u64 layer = 0;
};

struct KconnStats {
    u64 split_io = 0;
    u64 extract_io = 0;
    u64 delete_io = 0;
    u64 delete_passes = 0;
    std::vector<u64> forest_sizes;
    std::vector<unsigned char> layer_failed; // extraction hit its round cap
};

struct Certificate {
    u64 V = 0;
    u32 k = 0;
    ExtVec<ForestEdge> edges; // grouped by layer in extraction order
    KconnStats stats;
};

// Splits a multi-section array into one single-section array per layer
// with a single distribution pass. Consumes arr.
std::vector<SketchArray> split_layers(BlockDevice& dev, SketchArray arr);

// Peels one spanning forest per layer, deleting earlier forests from
// later layers under cfg.schedule. Layer i yields a spanning forest of
// the surviving graph minus all earlier forests, so the union is a
// connectivity certificate: it preserves every cut value up to k.
// Consumes arr.
Certificate extract_certificate(BlockDevice& dev, SketchArray arr, const KconnConfig& cfg = {});

struct MinCutResult {
    u64 value = 0;        // exact edge connectivity of the certificate
    bool saturated = false; // value >= k: the true cut is only known to be >= k
    std::vector<u64> side;  // vertices on one shore of a minimum cut
};

// Edge connectivity of the certificate, decided by an in-memory
// contraction solver. Loading the edge list is charged to the device;
// the solver's working memory is host-side, outside the device model.
MinCutResult min_cut_upto_k(BlockDevice& dev, const Certificate& cert, u64 k);

} // namespace emsk
