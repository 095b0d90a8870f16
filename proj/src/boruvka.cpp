#include "emsk/boruvka.hpp"

#include <algorithm>
#include <optional>

namespace emsk {

namespace {

struct CandRec {
    u64 inside = 0; // live component id that sampled the edge
    u64 other = 0;  // endpoint on the far side, still a raw unit id
    u64 wu = 0, wv = 0;
};

struct RecInfo {
    u64 pos = 0, id = 0, rep = 0, keep = 0;
};

struct SrcRef {
    u64 rep = 0, pos = 0;
};

struct PosPair {
    u64 src = 0, dst = 0;
};

// streams rep lookups for ascending ids against the node-sorted map;
// ids absent from the map are their own representative
class RepLookup {
public:
    RepLookup(BlockDevice& dev, const ExtVec<NodeRep>& reps) : r_(dev, reps) {}

    u64 rep_of(u64 id) {
        while ((!valid_ || cur_.node < id) && !r_.done()) {
            cur_ = r_.next();
            valid_ = true;
        }
        return (valid_ && cur_.node == id) ? cur_.rep : id;
    }

private:
    ExtReader<NodeRep> r_;
    NodeRep cur_{};
    bool valid_ = false;
};

class RetiredLookup {
public:
    RetiredLookup(BlockDevice& dev, const ExtVec<u64>& ids) : r_(dev, ids) { advance(); }

    bool is_retired(u64 id) {
        if (have_ && cur_ == id) {
            advance();
            return true;
        }
        return false;
    }

private:
    void advance() {
        have_ = !r_.done();
        if (have_) cur_ = r_.next();
    }

    ExtReader<u64> r_;
    u64 cur_ = 0;
    bool have_ = false;
};

struct Phase1Out {
    ExtVec<CandRec> cands;
    ExtVec<u64> retired;
    u64 n_fails = 0;
};

// one scan over the live array, sampling the first section of each record
Phase1Out phase1_sample(BlockDevice& dev, const ExtVec<word>& live, u64 stride,
                        const SketchLayout& view, u64 nlive) {
    const u64 sw = view.unit_words();
    Phase1Out o;
    o.cands = ext_alloc<CandRec>(dev, std::max<u64>(nlive, 1));
    o.retired = ext_alloc<u64>(dev, std::max<u64>(nlive, 1));
    u64 n_cands = 0, n_retired = 0;
    {
        RamCharge charge(dev, sw + 1);
        std::vector<word> buf(sw + 1);
        WideReader rd(dev, live, stride, 0, nlive);
        ExtWriter<CandRec> cw(dev, o.cands);
        ExtWriter<u64> rw(dev, o.retired);
        while (!rd.done()) {
            rd.read({buf.data(), sw + 1});
            u64 id = buf[0];
            SampleResult s = sketch_sample({buf.data() + 1, sw}, view, 0);
            if (s.status == SampleStatus::empty) {
                rw.push(id);
                ++n_retired;
            } else if (s.status == SampleStatus::fail) {
                ++o.n_fails;
            } else {
                u64 other = s.coef > 0 ? s.edge.v : s.edge.u;
                cw.push(CandRec{id, other, s.edge.u, s.edge.v});
                ++n_cands;
            }
        }
    }
    ext_shrink(dev, o.cands, n_cands);
    ext_shrink(dev, o.retired, n_retired);
    return o;
}

// compaction only: drop retired records, keep order
ExtVec<word> drop_retired(BlockDevice& dev, ExtVec<word> live, u64 stride,
                          const ExtVec<u64>& retired, u64 nkeep) {
    ExtVec<word> out = ext_alloc<word>(dev, nkeep * stride);
    {
        WideReader rd(dev, live, stride);
        WideWriter ww(dev, out);
        RetiredLookup ret(dev, retired);
        while (!rd.done()) {
            if (ret.is_retired(rd.peek_word(0))) {
                rd.skip();
                continue;
            }
            for (u64 i = 0; i < stride; ++i) ww.put(rd.peek_word(i));
            rd.skip();
        }
        assert(ww.words() == nkeep * stride);
    }
    ext_free(dev, live);
    return out;
}

// records fit in RAM: relabel + stable sort by destination + one
// accumulating scan
ExtVec<word> contract_sorted(BlockDevice& dev, ExtVec<word> live, u64 stride,
                             const SketchLayout& L, const ExtVec<NodeRep>& rep_map,
                             const ExtVec<u64>& retired, u64 n_out) {
    u64 nlive = live.size() / stride;
    u64 n_kept = nlive - retired.size();
    ExtVec<word> relabeled = ext_alloc<word>(dev, n_kept * stride);
    {
        RamCharge charge(dev, stride);
        std::vector<word> buf(stride);
        WideReader rd(dev, live, stride);
        WideWriter ww(dev, relabeled);
        RepLookup look(dev, rep_map);
        RetiredLookup ret(dev, retired);
        while (!rd.done()) {
            u64 id = rd.peek_word(0);
            if (ret.is_retired(id)) {
                rd.skip();
                continue;
            }
            rd.read(buf);
            buf[0] = look.rep_of(id);
            ww.push(buf);
        }
    }
    ext_free(dev, live);

    // stability keeps id order inside each group, so the group head is
    // the representative's own record
    ExtVec<word> sorted = wide_sort(dev, relabeled, stride, 0);

    ExtVec<word> fresh = ext_alloc<word>(dev, n_out * stride);
    {
        RamCharge charge(dev, 2 * stride);
        std::vector<word> acc(stride), buf(stride);
        bool have = false;
        WideReader rd(dev, sorted, stride);
        WideWriter ww(dev, fresh);
        while (!rd.done()) {
            rd.read(buf);
            if (have && buf[0] == acc[0]) {
                sketch_merge_slice({acc.data() + 1, stride - 1}, {buf.data() + 1, stride - 1},
                                   L, 0);
            } else {
                if (have) ww.push(acc);
                acc = buf;
                have = true;
            }
        }
        if (have) ww.push(acc);
        assert(ww.words() == n_out * stride);
    }
    ext_free(dev, sorted);
    return fresh;
}

// records too wide to sort: add each merged source into its destination
// in place, slice by slice, then compact
ExtVec<word> contract_in_place(BlockDevice& dev, ExtVec<word> live, u64 stride,
                               const SketchLayout& L, const ExtVec<NodeRep>& rep_map,
                               const ExtVec<u64>& retired, u64 n_out) {
    u64 nlive = live.size() / stride;
    ExtVec<RecInfo> infos = ext_alloc<RecInfo>(dev, nlive);
    ExtVec<SrcRef> srcs = ext_alloc<SrcRef>(dev, nlive);
    u64 n_src = 0;
    {
        WideReader rd(dev, live, stride);
        ExtWriter<RecInfo> iw(dev, infos);
        ExtWriter<SrcRef> sw(dev, srcs);
        RepLookup look(dev, rep_map);
        RetiredLookup ret(dev, retired);
        while (!rd.done()) {
            u64 pos = rd.index();
            u64 id = rd.peek_word(0);
            rd.skip();
            if (ret.is_retired(id)) {
                iw.push(RecInfo{pos, id, id, 0});
                continue;
            }
            u64 rep = look.rep_of(id);
            if (rep != id) {
                sw.push(SrcRef{rep, pos});
                ++n_src;
            }
            iw.push(RecInfo{pos, id, rep, rep == id ? u64(1) : u64(0)});
        }
    }
    ext_shrink(dev, srcs, n_src);

    // destination positions: join sources (sorted by rep) against the
    // id-ascending record table
    ExtVec<SrcRef> ssrcs = ext_sort_by(dev, srcs, [](const SrcRef& s) { return s.rep; });
    ext_free(dev, srcs);
    ExtVec<PosPair> pairs = ext_alloc<PosPair>(dev, std::max<u64>(n_src, 1));
    {
        ExtWriter<PosPair> pw(dev, pairs);
        ExtReader<RecInfo> ir(dev, infos);
        RecInfo cur{};
        bool valid = false;
        for (ExtReader<SrcRef> sr(dev, ssrcs); !sr.done();) {
            SrcRef s = sr.next();
            while ((!valid || cur.id < s.rep) && !ir.done()) {
                cur = ir.next();
                valid = true;
            }
            assert(valid && cur.id == s.rep && cur.keep == 1);
            pw.push(PosPair{s.pos, cur.pos});
        }
    }
    ext_shrink(dev, pairs, n_src);
    ext_free(dev, ssrcs);
    ExtVec<PosPair> spairs = ext_sort_by(dev, pairs, [](const PosPair& p) { return p.src; });
    ext_free(dev, pairs);

    const u64 phi = stride - 1;
    {
        u64 slice_w = std::max<u64>(1, dev.M() / 8);
        RamCharge charge(dev, 2 * slice_w);
        std::vector<word> sbuf(slice_w), dbuf(slice_w);
        for (ExtReader<PosPair> pr(dev, spairs); !pr.done();) {
            PosPair p = pr.next();
            for (u64 lo = 0; lo < phi; lo += slice_w) {
                u64 len = std::min(slice_w, phi - lo);
                dev.read(live.arr.word_off + p.src * stride + 1 + lo, {sbuf.data(), len});
                dev.read(live.arr.word_off + p.dst * stride + 1 + lo, {dbuf.data(), len});
                sketch_merge_slice({dbuf.data(), len}, {sbuf.data(), len}, L, lo);
                dev.write(live.arr.word_off + p.dst * stride + 1 + lo, {dbuf.data(), len});
            }
        }
    }
    ext_free(dev, spairs);

    ExtVec<word> fresh = ext_alloc<word>(dev, n_out * stride);
    {
        WideReader rd(dev, live, stride);
        WideWriter ww(dev, fresh);
        for (ExtReader<RecInfo> ir(dev, infos); !ir.done();) {
            RecInfo info = ir.next();
            if (info.keep == 0) {
                rd.skip();
                continue;
            }
            for (u64 i = 0; i < stride; ++i) ww.put(rd.peek_word(i));
            rd.skip();
        }
        assert(ww.words() == n_out * stride);
    }
    ext_free(dev, infos);
    ext_free(dev, live);
    return fresh;
}

} // namespace

CcResult boruvka_extract(BlockDevice& dev, SketchArray arr) {
    const SketchLayout L = arr.layout;
    assert(!L.sections.empty());
    assert(L.num_units == L.V && "component extraction needs unit ids == code vertex ids");
    const u64 U = L.num_units;
    const u64 phi = L.unit_words();
    const u64 stride = phi + 1;

    SketchLayout view = L;
    view.sections.assign(1, L.sections[0]);

    CcResult res;
    BatchedUnionFind uf(dev, U);

    ExtVec<word> live = ext_alloc<word>(dev, U * stride);
    {
        ExtReader<word> r(dev, arr.data);
        WideWriter ww(dev, live);
        for (u64 u = 0; u < U; ++u) {
            ww.put(u);
            for (u64 i = 0; i < phi; ++i) ww.put(r.next());
        }
    }
    ext_free(dev, arr.data);

    ExtVec<EdgeKey> forest = ext_alloc<EdgeKey>(dev, std::max<u64>(U, 1));
    u64 total_merges = 0;
    {
        ExtWriter<EdgeKey> fw(dev, forest);
        u64 nlive = U;
        const u64 cap_rounds = U <= 1 ? 0 : 2 * u64(ceil_log2(U)) + 8;

        while (nlive > 1 && res.stats.rounds < cap_rounds) {
            ++res.stats.rounds;
            RoundInfo ri;
            ri.live_before = nlive;

            Phase1Out p1 = phase1_sample(dev, live, stride, view, nlive);
            ri.fails = p1.n_fails;
            ri.retires = p1.retired.size();
            ri.ok_samples = p1.cands.size();

            ExtVec<NodeRep> rep_map{};
            ExtVec<MergeEdge> real{};
            bool have_maps = false;
            u64 n_merge = 0;

            if (!p1.cands.empty()) {
                u64 idx = 0;
                ExtVec<UfQuery> qs = ext_scan<UfQuery>(dev, p1.cands, [&idx](const CandRec& c) {
                    return UfQuery{c.other, idx++};
                });
                ExtVec<UfQuery> rs = uf.resolve(std::move(qs));
                ExtVec<UfQuery> bytag =
                    ext_sort_by(dev, rs, [](const UfQuery& q) { return q.tag; });
                ext_free(dev, rs);

                ExtVec<MergeEdge> h = ext_alloc<MergeEdge>(dev, p1.cands.size());
                u64 nh = 0;
                {
                    ExtWriter<MergeEdge> hw(dev, h);
                    ExtReader<UfQuery> qr(dev, bytag);
                    for (ExtReader<CandRec> cr(dev, p1.cands); !cr.done();) {
                        CandRec c = cr.next();
                        UfQuery q = qr.next();
                        if (q.node == c.inside) {
                            ++ri.self_merges;
                            continue;
                        }
                        hw.push(MergeEdge{c.inside, q.node, c.wu, c.wv});
                        ++nh;
                    }
                }
                ext_shrink(dev, h, nh);
                ext_free(dev, bytag);

                if (nh > 0) {
                    MergeGraphResult mg = merge_graph_cc(dev, h, U);
                    rep_map = mg.rep_map;
                    real = mg.real;
                    have_maps = true;
                    n_merge = real.size();

                    ExtVec<UfMerge> ms = ext_alloc<UfMerge>(dev, rep_map.size());
                    u64 nm = 0;
                    {
                        ExtWriter<UfMerge> mw(dev, ms);
                        for (ExtReader<NodeRep> rr(dev, rep_map); !rr.done();) {
                            NodeRep n = rr.next();
                            if (n.node != n.rep) {
                                mw.push(UfMerge{n.node, n.rep});
                                ++nm;
                            }
                        }
                    }
                    assert(nm == n_merge && "merge map disagrees with the real-merge list");
                    ext_shrink(dev, ms, nm);
                    if (nm > 0) {
                        uf.apply_merges(ms);
                        uf.flatten();
                    }
                    ext_free(dev, ms);

                    for (ExtReader<MergeEdge> rr(dev, real); !rr.done();) {
                        MergeEdge e = rr.next();
                        fw.push(EdgeKey{e.wu, e.wv});
                    }
                }
                ext_free(dev, h);
            }
            ri.merges = n_merge;

            if (n_merge + ri.retires > 0) {
                u64 n_out = nlive - ri.retires - n_merge;
                if (n_merge == 0) {
                    live = drop_retired(dev, live, stride, p1.retired, n_out);
                } else if (stride <= dev.M() / 4) {
                    live = contract_sorted(dev, live, stride, L, rep_map, p1.retired, n_out);
                } else {
                    live = contract_in_place(dev, live, stride, L, rep_map, p1.retired, n_out);
                }
                nlive = n_out;
            }

            if (have_maps) {
                ext_free(dev, rep_map);
                ext_free(dev, real);
            }
            ext_free(dev, p1.cands);
            ext_free(dev, p1.retired);

            total_merges += n_merge;
            res.stats.sample_fails += ri.fails;
            res.stats.self_merges += ri.self_merges;
            res.stats.retired += ri.retires;
            res.stats.log.push_back(ri);
        }
        res.stats.hit_round_cap = nlive > 1;
    }
    ext_free(dev, live);

    ext_shrink(dev, forest, total_merges);
    uf.flatten();
    res.labels = ext_scan<u64>(dev, uf.parents(), [](const u64& p) { return p; });
    res.forest = forest;
    res.components = U - total_merges;
    return res;
}

SketchArray slice_sections(BlockDevice& dev, const SketchArray& arr, u32 first, u32 count) {
    const SketchLayout& L = arr.layout;
    assert(count >= 1 && first + count <= L.sections.size());
    SketchLayout S = L;
    S.sections.assign(L.sections.begin() + first, L.sections.begin() + first + count);

    const u64 in_w = L.unit_words(), out_w = S.unit_words();
    const u64 lo = L.section_off(first), hi = L.section_off(first + count);
    SketchArray out{S, ext_alloc<word>(dev, L.num_units * out_w)};
    {
        WordCache rc(dev);
        WideWriter ww(dev, out.data);
        for (u64 u = 0; u < L.num_units; ++u) {
            u64 base = arr.data.arr.word_off + u * in_w;
            for (u64 i = 0; i < L.counter_words; ++i) ww.put(rc.get(base + i));
            for (u64 i = lo; i < hi; ++i) ww.put(rc.get(base + i));
        }
    }
    return out;
}

} // namespace emsk
