#pragma once

#include <span>
#include <vector>

#include "emsk/sketch.hpp"

namespace emsk {

struct WeightedEdge {
    u64 u = 0, v = 0;
    u64 w = 1;
    bool operator==(const WeightedEdge&) const = default;
};

// Host-side max-flow solvers for certificate-sized graphs. Both treat the
// input as undirected and ignore self loops.

// Unit capacities. Augments at most `cap` times and returns
// min(lambda_st, cap), so callers can decide lambda_st < cap exactly.
u64 st_connectivity_upto(u64 V, std::span<const EdgeKey> edges, u64 s, u64 t, u64 cap);

// Integer capacities. Returns the exact s-t max flow value; when `side` is
// given it receives the source shore of a minimum cut, sorted.
u64 st_min_cut_weighted(u64 V, std::span<const WeightedEdge> edges, u64 s, u64 t,
                        std::vector<u64>* side = nullptr);

} // namespace emsk
