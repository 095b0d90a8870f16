#pragma once

#include "emsk/ext_algo.hpp"

namespace emsk {

struct UfQuery {
    u64 node = 0;
    u64 tag = 0;
};

struct UfMerge {
    u64 src = 0; // must be a root
    u64 dst = 0; // must be a root, src != dst
};

// Parent forest on the device, driven entirely by sort+scan batches. The
// caller flattens between merge waves so resolution depth stays small.
class BatchedUnionFind {
public:
    BatchedUnionFind(BlockDevice& dev, u64 n);
    ~BatchedUnionFind();

    BatchedUnionFind(const BatchedUnionFind&) = delete;
    BatchedUnionFind& operator=(const BatchedUnionFind&) = delete;

    u64 size() const { return n_; }

    // rewrites each query's node to its root; preserves tags; returns a
    // new vec sorted by resolved root. Frees the input. resolve_passes()
    // reports the sort+scan iterations the last call used.
    ExtVec<UfQuery> resolve(ExtVec<UfQuery> queries);
    u64 resolve_passes() const { return passes_; }

    // parent[src] = dst for each entry; sources must be distinct roots
    void apply_merges(const ExtVec<UfMerge>& merges);

    // full path compression: every parent becomes its root
    void flatten();

    // the parent array itself; equals the root labeling right after
    // flatten()
    const ExtVec<u64>& parents() const { return parent_; }

private:
    BlockDevice& dev_;
    u64 n_;
    ExtVec<u64> parent_;
    u64 passes_ = 0;
};

struct MergeEdge {
    u64 a = 0, b = 0;   // component ids
    u64 wu = 0, wv = 0; // witness endpoints
};

struct NodeRep {
    u64 node = 0;
    u64 rep = 0;
};

struct MergeGraphResult {
    ExtVec<NodeRep> rep_map;    // sorted by node, one entry per distinct id
    ExtVec<MergeEdge> real;     // spanning structure of H: nodes - components edges
};

// Connected components of the merge graph H. Representatives are the
// minimum id of each component, so both execution paths agree exactly.
// In-memory union-find when the id universe fits in M/4, sort-based
// hooking otherwise.
MergeGraphResult merge_graph_cc(BlockDevice& dev, const ExtVec<MergeEdge>& h, u64 id_universe);

} // namespace emsk
