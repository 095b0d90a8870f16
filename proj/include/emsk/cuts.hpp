#pragma once

#include <vector>

#include "emsk/boruvka.hpp"
#include "emsk/flow.hpp"
#include "emsk/kconn.hpp"

namespace emsk {

// Geometry of a skeleton stack: num_levels nested subsample levels, each
// holding a k-forest certificate sketch of the level graph. Level i keeps
// an edge when its subsample depth is at least i, so level membership is
// nested and a deletion routes exactly like its insertion.
struct SkeletonParams {
    u64 V = 0;
    double eps = 0.5;
    u64 seed = 0;
    double c_levels = 2.0; // levels = ceil(c_levels * log2 V) + 1
    double c_k = 16.0;     // forests per level, eps and log scaled
    double c0 = 2.0;       // sampler copies per section, log scaled
    u32 k_override = 0;    // nonzero pins k directly
    bool sparsifier = false; // k scales with log^2 V instead of log V
};

u32 skeleton_k(const SkeletonParams& p);
u32 skeleton_num_levels(const SkeletonParams& p);
SketchLayout make_skeleton_stack_layout(const SkeletonParams& p);

struct SkeletonStack {
    SkeletonParams params;
    u32 k = 0;
    u32 num_levels = 0;
    SketchArray arr;
};

// Wraps an array ingested against make_skeleton_stack_layout(p).
SkeletonStack assemble_stack(const SkeletonParams& p, SketchArray arr);

struct LevelCut {
    u64 lambda = 0;     // exact when not saturated
    bool saturated = false;
    std::vector<u64> side;
};

// Extracts the level certificate and solves its minimum cut up to k.
LevelCut level_cut(BlockDevice& dev, const SkeletonStack& st, u32 level);

struct CutEstimate {
    u64 value = 0;        // 2^level * lambda of the level certificate
    u32 level = 0;
    u64 level_lambda = 0;
    bool fallback = false; // level lambdas were not monotone; linear scan used
    u64 levels_probed = 0;
    std::vector<u64> side;
};

// Binary search for the first unsaturated level; throws saturation_error
// when every level is saturated.
CutEstimate approx_min_cut(BlockDevice& dev, const SkeletonStack& st);

// Edges with exactly one endpoint in side, via two sort+scan marking
// passes over the full edge list.
ExtVec<EdgeKey> recover_cut_edges(BlockDevice& dev, const std::vector<u64>& side,
                                  const ExtVec<EdgeKey>& edges);

struct Sparsifier {
    u64 V = 0;
    std::vector<WeightedEdge> edges;
    bool fallback = false;
};

// Per-edge level search over the union of level certificates; an edge is
// kept with weight 2^j, j its first level with endpoint connectivity
// below k, when the edge is present in that level's certificate.
Sparsifier build_sparsifier(BlockDevice& dev, const SkeletonStack& st);

// Exact s-t min cut on the weighted sparsifier. Throws on s == t.
u64 query_st_cut(const Sparsifier& h, u64 s, u64 t);

} // namespace emsk
