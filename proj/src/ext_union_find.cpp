#include "emsk/ext_union_find.hpp"

#include <algorithm>
#include <vector>

namespace emsk {

BatchedUnionFind::BatchedUnionFind(BlockDevice& dev, u64 n) : dev_(dev), n_(n) {
    parent_ = ext_generate<u64>(dev_, n_, [](u64 i) { return i; });
}

BatchedUnionFind::~BatchedUnionFind() { ext_free(dev_, parent_); }

ExtVec<UfQuery> BatchedUnionFind::resolve(ExtVec<UfQuery> queries) {
    passes_ = 0;
    ExtVec<UfQuery> cur = queries;
    bool changed = true;
    while (changed) {
        changed = false;
        ++passes_;
        ExtVec<UfQuery> sorted =
            ext_sort_by(dev_, cur, [](const UfQuery& q) { return q.node; });
        ext_free(dev_, cur);
        ExtVec<UfQuery> next = ext_alloc<UfQuery>(dev_, sorted.size());
        {
            WordCache pc(dev_);
            ExtWriter<UfQuery> w(dev_, next);
            for (ExtReader<UfQuery> r(dev_, sorted); !r.done();) {
                UfQuery q = r.next();
                assert(q.node < n_);
                u64 p = pc.get(parent_.arr.word_off + q.node);
                if (p != q.node) {
                    q.node = p;
                    changed = true;
                }
                w.push(q);
            }
        }
        ext_free(dev_, sorted);
        cur = next;
    }
    return cur;
}

void BatchedUnionFind::apply_merges(const ExtVec<UfMerge>& merges) {
    ExtVec<UfMerge> sorted =
        ext_sort_by(dev_, merges, [](const UfMerge& m) { return m.src; });
    {
        WordCache pc(dev_);
        u64 prev = ~u64(0);
        for (ExtReader<UfMerge> r(dev_, sorted); !r.done();) {
            UfMerge m = r.next();
            assert(m.src < n_ && m.dst < n_ && m.src != m.dst);
            assert(m.src != prev);
            prev = m.src;
            assert(pc.get(parent_.arr.word_off + m.src) == m.src);
            pc.put(parent_.arr.word_off + m.src, m.dst);
        }
    }
    ext_free(dev_, sorted);
}

void BatchedUnionFind::flatten() {
    u64 i = 0;
    ExtVec<UfQuery> qs = ext_scan<UfQuery>(dev_, parent_, [&i](const u64& p) {
        return UfQuery{p, i++};
    });
    ExtVec<UfQuery> rs = resolve(std::move(qs));
    ExtVec<UfQuery> by_tag = ext_sort_by(dev_, rs, [](const UfQuery& q) { return q.tag; });
    ext_free(dev_, rs);
    ExtVec<u64> fresh = ext_scan<u64>(dev_, by_tag, [](const UfQuery& q) { return q.node; });
    ext_free(dev_, by_tag);
    ext_free(dev_, parent_);
    parent_ = fresh;
}

namespace {

u64 in_memory_words(u64 id_universe) { return id_universe + id_universe / 64 + 2; }

MergeGraphResult merge_cc_in_memory(BlockDevice& dev, const ExtVec<MergeEdge>& h,
                                    u64 id_universe) {
    RamCharge charge(dev, in_memory_words(id_universe));
    std::vector<u64> parent(id_universe);
    for (u64 i = 0; i < id_universe; ++i) parent[i] = i;
    std::vector<bool> touched(id_universe, false);

    auto find = [&](u64 x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };

    MergeGraphResult out;
    out.real = ext_alloc<MergeEdge>(dev, h.size());
    u64 nreal = 0;
    {
        ExtWriter<MergeEdge> realw(dev, out.real);
        for (ExtReader<MergeEdge> r(dev, h); !r.done();) {
            MergeEdge e = r.next();
            assert(e.a < id_universe && e.b < id_universe);
            touched[e.a] = touched[e.b] = true;
            u64 ra = find(e.a), rb = find(e.b);
            if (ra == rb) continue;
            // smaller root wins so representatives are component minima
            parent[std::max(ra, rb)] = std::min(ra, rb);
            realw.push(e);
            ++nreal;
        }
    }
    ext_shrink(dev, out.real, nreal);

    u64 ntouched = 0;
    for (u64 i = 0; i < id_universe; ++i) ntouched += touched[i];
    out.rep_map = ext_alloc<NodeRep>(dev, ntouched);
    ExtWriter<NodeRep> mw(dev, out.rep_map);
    for (u64 i = 0; i < id_universe; ++i)
        if (touched[i]) mw.push(NodeRep{i, find(i)});
    mw.flush();
    return out;
}

struct Cand {
    u64 node = 0, nbr = 0;
    u64 wu = 0, wv = 0;
};

// rewrite one endpoint of every edge through the rep map (merge join,
// both sides sorted)
template <class Get, class Set>
ExtVec<MergeEdge> join_endpoint(BlockDevice& dev, ExtVec<MergeEdge> edges,
                                const ExtVec<NodeRep>& reps, Get get, Set set) {
    ExtVec<MergeEdge> sorted =
        ext_sort_by(dev, edges, [&](const MergeEdge& e) { return get(e); });
    ext_free(dev, edges);
    ExtVec<MergeEdge> out = ext_alloc<MergeEdge>(dev, sorted.size());
    {
        ExtWriter<MergeEdge> w(dev, out);
        ExtReader<NodeRep> rr(dev, reps);
        NodeRep cur{~u64(0), ~u64(0)};
        for (ExtReader<MergeEdge> er(dev, sorted); !er.done();) {
            MergeEdge e = er.next();
            while (cur.node != get(e)) {
                assert(!rr.done());
                cur = rr.next();
            }
            set(e, cur.rep);
            w.push(e);
        }
    }
    ext_free(dev, sorted);
    return out;
}

MergeGraphResult merge_cc_hooking(BlockDevice& dev, const ExtVec<MergeEdge>& h) {
    // distinct endpoint ids, each initially its own representative
    ExtVec<NodeRep> reps;
    {
        ExtVec<u64> ends = ext_alloc<u64>(dev, 2 * h.size());
        {
            ExtWriter<u64> w(dev, ends);
            for (ExtReader<MergeEdge> r(dev, h); !r.done();) {
                MergeEdge e = r.next();
                w.push(e.a);
                w.push(e.b);
            }
        }
        ExtVec<u64> sends = ext_sort(dev, ends, std::less<u64>());
        ext_free(dev, ends);
        reps = ext_alloc<NodeRep>(dev, sends.size());
        u64 n_nodes = 0;
        {
            ExtWriter<NodeRep> w(dev, reps);
            u64 prev = ~u64(0);
            for (ExtReader<u64> r(dev, sends); !r.done();) {
                u64 v = r.next();
                if (v == prev) continue;
                prev = v;
                w.push(NodeRep{v, v});
                ++n_nodes;
            }
        }
        ext_shrink(dev, reps, n_nodes);
        ext_free(dev, sends);
    }

    MergeGraphResult out;
    out.real = ext_alloc<MergeEdge>(dev, h.size());
    ExtWriter<MergeEdge> realw(dev, out.real);
    u64 nreal = 0;

    ExtVec<MergeEdge> edges = ext_scan<MergeEdge>(dev, h, [](const MergeEdge& e) { return e; });
    u64 live = edges.size();

    for (int iter = 0; iter < 64 && live > 0; ++iter) {
        edges = join_endpoint(
            dev, edges, reps, [](const MergeEdge& e) { return e.a; },
            [](MergeEdge& e, u64 v) { e.a = v; });
        edges = join_endpoint(
            dev, edges, reps, [](const MergeEdge& e) { return e.b; },
            [](MergeEdge& e, u64 v) { e.b = v; });

        // drop settled edges
        live = 0;
        {
            ExtVec<MergeEdge> kept = ext_alloc<MergeEdge>(dev, edges.size());
            {
                ExtWriter<MergeEdge> w(dev, kept);
                for (ExtReader<MergeEdge> r(dev, edges); !r.done();) {
                    MergeEdge e = r.next();
                    if (e.a == e.b) continue;
                    w.push(e);
                    ++live;
                }
            }
            ext_shrink(dev, kept, live);
            ext_free(dev, edges);
            edges = kept;
        }
        if (live == 0) break;

        // for each current root, its smallest neighboring root
        ExtVec<Cand> cands = ext_alloc<Cand>(dev, 2 * live);
        {
            ExtWriter<Cand> w(dev, cands);
            for (ExtReader<MergeEdge> r(dev, edges); !r.done();) {
                MergeEdge e = r.next();
                w.push(Cand{e.a, e.b, e.wu, e.wv});
                w.push(Cand{e.b, e.a, e.wu, e.wv});
            }
        }
        ExtVec<Cand> scands = ext_sort(dev, cands, [](const Cand& x, const Cand& y) {
            return x.node < y.node || (x.node == y.node && x.nbr < y.nbr);
        });
        ext_free(dev, cands);

        // hooks point strictly downward in id order, so they are acyclic
        ExtVec<NodeRep> hooks = ext_alloc<NodeRep>(dev, reps.size());
        u64 nhooks = 0;
        {
            ExtWriter<NodeRep> w(dev, hooks);
            u64 prev = ~u64(0);
            for (ExtReader<Cand> r(dev, scands); !r.done();) {
                Cand c = r.next();
                if (c.node == prev) continue;
                prev = c.node;
                if (c.nbr < c.node) {
                    w.push(NodeRep{c.node, c.nbr});
                    realw.push(MergeEdge{c.node, c.nbr, c.wu, c.wv});
                    ++nreal;
                    ++nhooks;
                }
            }
        }
        ext_shrink(dev, hooks, nhooks);
        ext_free(dev, scands);

        // fold hooks into the rep map, then pointer-jump to closure
        ExtVec<NodeRep> merged = ext_alloc<NodeRep>(dev, reps.size());
        {
            ExtWriter<NodeRep> w(dev, merged);
            ExtReader<NodeRep> hr(dev, hooks);
            NodeRep hcur{~u64(0), 0};
            bool hvalid = false;
            for (ExtReader<NodeRep> r(dev, reps); !r.done();) {
                NodeRep n = r.next();
                while ((!hvalid || hcur.node < n.node) && !hr.done()) {
                    hcur = hr.next();
                    hvalid = true;
                }
                if (hvalid && hcur.node == n.node && n.node == n.rep) n.rep = hcur.rep;
                w.push(n);
            }
        }
        ext_free(dev, hooks);
        ext_free(dev, reps);
        reps = merged;

        for (int jump = 0; jump < 64; ++jump) {
            // follow each rep pointer once: sort entries by rep, merge
            // against the node-sorted map itself
            ExtVec<NodeRep> byrep =
                ext_sort_by(dev, reps, [](const NodeRep& n) { return n.rep; });
            bool changed = false;
            ExtVec<NodeRep> next = ext_alloc<NodeRep>(dev, reps.size());
            {
                ExtWriter<NodeRep> w(dev, next);
                ExtReader<NodeRep> base(dev, reps);
                NodeRep cur{~u64(0), 0};
                bool valid = false;
                for (ExtReader<NodeRep> r(dev, byrep); !r.done();) {
                    NodeRep n = r.next();
                    while ((!valid || cur.node < n.rep) && !base.done()) {
                        cur = base.next();
                        valid = true;
                    }
                    assert(valid && cur.node == n.rep);
                    if (cur.rep != n.rep) {
                        n.rep = cur.rep;
                        changed = true;
                    }
                    w.push(n);
                }
            }
            ext_free(dev, byrep);
            ExtVec<NodeRep> bynode =
                ext_sort_by(dev, next, [](const NodeRep& n) { return n.node; });
            ext_free(dev, next);
            ext_free(dev, reps);
            reps = bynode;
            if (!changed) break;
        }
    }

    if (live > 0) throw em_error("merge graph did not converge");
    ext_free(dev, edges);
    realw.flush();
    ext_shrink(dev, out.real, nreal);
    out.rep_map = reps;
    return out;
}

} // namespace

MergeGraphResult merge_graph_cc(BlockDevice& dev, const ExtVec<MergeEdge>& h, u64 id_universe) {
    if (h.empty()) {
        MergeGraphResult out;
        out.rep_map = ext_alloc<NodeRep>(dev, 0);
        out.real = ext_alloc<MergeEdge>(dev, 0);
        return out;
    }
    if (in_memory_words(id_universe) <= dev.M() / 4)
        return merge_cc_in_memory(dev, h, id_universe);
    return merge_cc_hooking(dev, h);
}

} // namespace emsk
