#include "oracles.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <queue>
#include <set>

namespace emsk::oracle {

UnionFind::UnionFind(u64 n) : parent_(n), comps_(n) {
    std::iota(parent_.begin(), parent_.end(), u64(0));
}

u64 UnionFind::find(u64 x) {
    while (parent_[x] != x) {
        parent_[x] = parent_[parent_[x]];
        x = parent_[x];
    }
    return x;
}

bool UnionFind::unite(u64 a, u64 b) {
    u64 ra = find(a), rb = find(b);
    if (ra == rb) return false;
    parent_[std::max(ra, rb)] = std::min(ra, rb);
    --comps_;
    return true;
}

std::vector<u64> UnionFind::min_labels() {
    std::vector<u64> out(parent_.size());
    for (u64 i = 0; i < parent_.size(); ++i) out[i] = find(i);
    return out;
}

std::vector<u64> cc_labels(u64 V, const std::vector<Edge>& edges) {
    UnionFind uf(V);
    for (const Edge& e : edges) uf.unite(e.first, e.second);
    return uf.min_labels();
}

u64 cc_count(u64 V, const std::vector<Edge>& edges) {
    UnionFind uf(V);
    for (const Edge& e : edges) uf.unite(e.first, e.second);
    return uf.components();
}

std::vector<u64> cc_labels_hyper(u64 V, const std::vector<std::vector<u64>>& hyperedges) {
    UnionFind uf(V);
    for (const auto& h : hyperedges)
        for (u64 i = 1; i < h.size(); ++i) uf.unite(h[0], h[i]);
    return uf.min_labels();
}

bool valid_spanning_forest(u64 V, const std::vector<Edge>& edges,
                           const std::vector<Edge>& forest) {
    std::set<Edge> have(edges.begin(), edges.end());
    UnionFind uf(V);
    for (const Edge& f : forest) {
        if (!have.count(f)) return false;
        if (!uf.unite(f.first, f.second)) return false; // cycle
    }
    return forest.size() == V - cc_count(V, edges);
}

u64 kruskal_mst_weight(u64 V, const std::vector<std::pair<Edge, u64>>& wedges) {
    std::vector<std::pair<Edge, u64>> sorted = wedges;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });
    UnionFind uf(V);
    u64 total = 0;
    for (const auto& [e, w] : sorted)
        if (uf.unite(e.first, e.second)) total += w;
    return total;
}

namespace {

// adjacency-matrix max flow, fine at oracle sizes
u64 max_flow_matrix(std::vector<std::vector<u64>>& cap, u64 s, u64 t) {
    const u64 n = cap.size();
    u64 flow = 0;
    while (true) {
        std::vector<u64> prev(n, ~u64(0));
        prev[s] = s;
        std::deque<u64> q{s};
        while (!q.empty() && prev[t] == ~u64(0)) {
            u64 x = q.front();
            q.pop_front();
            for (u64 y = 0; y < n; ++y)
                if (prev[y] == ~u64(0) && cap[x][y] > 0) {
                    prev[y] = x;
                    q.push_back(y);
                }
        }
        if (prev[t] == ~u64(0)) return flow;
        u64 aug = std::numeric_limits<u64>::max();
        for (u64 y = t; y != s; y = prev[y]) aug = std::min(aug, cap[prev[y]][y]);
        for (u64 y = t; y != s; y = prev[y]) {
            cap[prev[y]][y] -= aug;
            cap[y][prev[y]] += aug;
        }
        flow += aug;
    }
}

} // namespace

u64 edge_connectivity(u64 V, const std::vector<Edge>& edges, u64 s, u64 t) {
    std::vector<std::vector<u64>> cap(V, std::vector<u64>(V, 0));
    for (const Edge& e : edges) {
        cap[e.first][e.second] += 1;
        cap[e.second][e.first] += 1;
    }
    return max_flow_matrix(cap, s, t);
}

u64 stoer_wagner_min_cut(u64 V, const std::vector<Edge>& edges) {
    assert(V >= 2);
    std::vector<std::vector<u64>> w(V, std::vector<u64>(V, 0));
    for (const Edge& e : edges) {
        w[e.first][e.second] += 1;
        w[e.second][e.first] += 1;
    }
    std::vector<u64> nodes(V);
    std::iota(nodes.begin(), nodes.end(), u64(0));
    u64 best = std::numeric_limits<u64>::max();
    while (nodes.size() > 1) {
        std::vector<u64> a;
        std::vector<char> in(V, 0);
        std::vector<u64> conn(V, 0);
        for (u64 step = 0; step < nodes.size(); ++step) {
            u64 pick = ~u64(0);
            for (u64 x : nodes)
                if (!in[x] && (pick == ~u64(0) || conn[x] > conn[pick])) pick = x;
            in[pick] = 1;
            a.push_back(pick);
            for (u64 x : nodes)
                if (!in[x]) conn[x] += w[pick][x];
        }
        u64 t = a.back(), s = a[a.size() - 2];
        best = std::min(best, conn[t]);
        // merge t into s
        for (u64 x : nodes)
            if (x != t && x != s) {
                w[s][x] += w[t][x];
                w[x][s] += w[x][t];
            }
        nodes.erase(std::find(nodes.begin(), nodes.end(), t));
    }
    return best;
}

bool is_bipartite(u64 V, const std::vector<Edge>& edges) {
    std::vector<std::vector<u64>> adj(V);
    for (const Edge& e : edges) {
        adj[e.first].push_back(e.second);
        adj[e.second].push_back(e.first);
    }
    std::vector<int> color(V, -1);
    for (u64 s = 0; s < V; ++s) {
        if (color[s] != -1) continue;
        color[s] = 0;
        std::deque<u64> q{s};
        while (!q.empty()) {
            u64 x = q.front();
            q.pop_front();
            for (u64 y : adj[x]) {
                if (color[y] == -1) {
                    color[y] = 1 - color[x];
                    q.push_back(y);
                } else if (color[y] == color[x]) {
                    return false;
                }
            }
        }
    }
    return true;
}

bool density_less(const Density& a, const Density& b) {
    return static_cast<unsigned __int128>(a.num) * b.den <
           static_cast<unsigned __int128>(b.num) * a.den;
}

namespace {

// test whether some subgraph has density strictly above p/q; capacities
// scaled by q keep everything integral
bool density_above(u64 V, const std::vector<Edge>& edges,
                   const std::vector<u64>& deg, u64 p, u64 q) {
    const u64 m = edges.size();
    if (m == 0) return false;
    const u64 n = V + 2, s = V, t = V + 1;
    std::vector<std::vector<u64>> cap(n, std::vector<u64>(n, 0));
    for (const Edge& e : edges) {
        cap[e.first][e.second] += q;
        cap[e.second][e.first] += q;
    }
    for (u64 v = 0; v < V; ++v) {
        cap[s][v] = m * q;
        cap[v][t] = m * q + 2 * p - q * deg[v];
    }
    u64 flow = max_flow_matrix(cap, s, t);
    return flow < m * q * V;
}

} // namespace

Density densest_exact(u64 V, const std::vector<Edge>& edges) {
    if (edges.empty() || V == 0) return Density{0, 1};
    std::vector<u64> deg(V, 0);
    for (const Edge& e : edges) {
        ++deg[e.first];
        ++deg[e.second];
    }
    std::vector<Density> cands;
    for (u64 q = 1; q <= V; ++q)
        for (u64 p = 0; p <= edges.size(); ++p) cands.push_back({p, q});
    std::sort(cands.begin(), cands.end(), density_less);
    cands.erase(std::unique(cands.begin(), cands.end(),
                            [](const Density& a, const Density& b) {
                                return !density_less(a, b) && !density_less(b, a);
                            }),
                cands.end());
    // the optimum is the smallest candidate c with no subgraph above c
    u64 lo = 0, hi = cands.size() - 1;
    while (lo < hi) {
        u64 mid = (lo + hi) / 2;
        if (density_above(V, edges, deg, cands[mid].num, cands[mid].den))
            lo = mid + 1;
        else
            hi = mid;
    }
    return cands[lo];
}

PeelResult charikar_peel(u64 V, const std::vector<Edge>& edges) {
    std::vector<std::set<u64>> adj(V);
    for (const Edge& e : edges) {
        adj[e.first].insert(e.second);
        adj[e.second].insert(e.first);
    }
    std::vector<char> alive(V, 1);
    u64 live_edges = edges.size(), live_nodes = V;
    PeelResult res;
    res.best = Density{0, 1};
    std::vector<u64> removal;
    u64 best_at = 0; // how many removals preceded the best prefix
    if (live_nodes > 0 && live_edges > 0) {
        Density d0{live_edges, live_nodes};
        res.best = d0;
    }
    for (u64 step = 0; step + 1 <= V && live_nodes > 0; ++step) {
        u64 pick = ~u64(0);
        for (u64 v = 0; v < V; ++v)
            if (alive[v] && (pick == ~u64(0) || adj[v].size() < adj[pick].size())) pick = v;
        alive[pick] = 0;
        --live_nodes;
        live_edges -= adj[pick].size();
        for (u64 y : adj[pick]) adj[y].erase(pick);
        adj[pick].clear();
        removal.push_back(pick);
        if (live_nodes > 0) {
            Density d{live_edges, live_nodes};
            if (density_less(res.best, d)) {
                res.best = d;
                best_at = removal.size();
            }
        }
    }
    std::vector<char> removed(V, 0);
    for (u64 i = 0; i < best_at; ++i) removed[removal[i]] = 1;
    for (u64 v = 0; v < V; ++v)
        if (!removed[v]) res.members.push_back(v);
    return res;
}

} // namespace emsk::oracle
