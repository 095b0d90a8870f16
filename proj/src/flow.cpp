#include "emsk/flow.hpp"

#include <algorithm>
#include <queue>

namespace emsk {

namespace {

// residual network; arc i and i^1 are partners
struct FlowNet {
    u64 V;
    std::vector<u64> to, cap;
    std::vector<std::vector<u32>> out;

    explicit FlowNet(u64 n) : V(n), out(n) {}

    void arc(u64 u, u64 v, u64 c) {
        out[u].push_back(u32(to.size()));
        to.push_back(v);
        cap.push_back(c);
        out[v].push_back(u32(to.size()));
        to.push_back(u);
        cap.push_back(c);
    }

    // one shortest augmenting path; returns the amount pushed
    u64 augment(u64 s, u64 t) {
        std::vector<u32> via(V, UINT32_MAX);
        std::vector<unsigned char> seen(V, 0);
        std::queue<u64> q;
        q.push(s);
        seen[s] = 1;
        while (!q.empty() && !seen[t]) {
            u64 x = q.front();
            q.pop();
            for (u32 a : out[x]) {
                if (cap[a] == 0 || seen[to[a]]) continue;
                seen[to[a]] = 1;
                via[to[a]] = a;
                q.push(to[a]);
            }
        }
        if (!seen[t]) return 0;
        u64 push = UINT64_MAX;
        for (u64 x = t; x != s; x = to[via[x] ^ 1]) push = std::min(push, cap[via[x]]);
        for (u64 x = t; x != s; x = to[via[x] ^ 1]) {
            cap[via[x]] -= push;
            cap[via[x] ^ 1] += push;
        }
        return push;
    }

    std::vector<u64> source_side(u64 s) const {
        std::vector<unsigned char> seen(V, 0);
        std::vector<u64> st = {s}, res;
        seen[s] = 1;
        while (!st.empty()) {
            u64 x = st.back();
            st.pop_back();
            res.push_back(x);
            for (u32 a : out[x])
                if (cap[a] > 0 && !seen[to[a]]) {
                    seen[to[a]] = 1;
                    st.push_back(to[a]);
                }
        }
        std::sort(res.begin(), res.end());
        return res;
    }
};

} // namespace

u64 st_connectivity_upto(u64 V, std::span<const EdgeKey> edges, u64 s, u64 t, u64 cap) {
    assert(s < V && t < V && s != t);
    FlowNet net(V);
    for (const EdgeKey& e : edges) {
        if (e.u == e.v) continue;
        assert(e.u < V && e.v < V);
        net.arc(e.u, e.v, 1);
    }
    u64 flow = 0;
    while (flow < cap) {
        u64 got = net.augment(s, t);
        if (got == 0) break;
        flow += got;
    }
    return std::min(flow, cap);
}

u64 st_min_cut_weighted(u64 V, std::span<const WeightedEdge> edges, u64 s, u64 t,
                        std::vector<u64>* side) {
    assert(s < V && t < V && s != t);
    FlowNet net(V);
    for (const WeightedEdge& e : edges) {
        if (e.u == e.v || e.w == 0) continue;
        assert(e.u < V && e.v < V);
        net.arc(e.u, e.v, e.w);
    }
    u64 flow = 0;
    for (;;) {
        u64 got = net.augment(s, t);
        if (got == 0) break;
        flow += got;
    }
    if (side) *side = net.source_side(s);
    return flow;
}

} // namespace emsk
