#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "emsk/sketch.hpp"

namespace emsk::testing {

struct StreamOp {
    EdgeKey e;
    int delta = 1;
};

// legal dynamic stream: no double insert, no phantom delete
inline std::vector<StreamOp> gen_stream(Rng& rng, u64 V, u64 n_ops, double delete_frac) {
    std::vector<StreamOp> ops;
    std::set<std::pair<u64, u64>> live;
    std::vector<std::pair<u64, u64>> live_list;
    u64 idle = 0;
    while (ops.size() < n_ops) {
        if (++idle > 64 * n_ops + 4096) throw em_error("stream request unsatisfiable");
        bool del = !live_list.empty() && rng.next_double() < delete_frac;
        if (del) {
            u64 i = rng.next_below(live_list.size());
            auto pr = live_list[i];
            if (!live.count(pr)) {
                live_list[i] = live_list.back();
                live_list.pop_back();
                continue;
            }
            live.erase(pr);
            ops.push_back({{pr.first, pr.second}, -1});
        } else {
            u64 u = rng.next_below(V), v = rng.next_below(V);
            if (u == v) continue;
            if (u > v) std::swap(u, v);
            if (live.count({u, v})) continue;
            live.insert({u, v});
            live_list.push_back({u, v});
            ops.push_back({{u, v}, +1});
        }
    }
    return ops;
}

inline std::set<std::pair<u64, u64>> final_edges(const std::vector<StreamOp>& ops) {
    std::set<std::pair<u64, u64>> live;
    for (const StreamOp& op : ops) {
        if (op.delta > 0)
            live.insert({op.e.u, op.e.v});
        else
            live.erase({op.e.u, op.e.v});
    }
    return live;
}

// a reordered stream may be illegal as a stream; sketches are linear, so
// equivalence checks may still use it
inline std::vector<StreamOp> shuffled(Rng& rng, std::vector<StreamOp> ops) {
    for (u64 i = ops.size(); i > 1; --i) std::swap(ops[i - 1], ops[rng.next_below(i)]);
    return ops;
}

} // namespace emsk::testing
