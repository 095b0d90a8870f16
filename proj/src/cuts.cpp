#include "emsk/cuts.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace emsk {

u32 skeleton_k(const SkeletonParams& p) {
    if (p.k_override) return p.k_override;
    double lg = std::log2(double(std::max<u64>(p.V, 2)));
    double scale = p.sparsifier ? lg * lg : lg;
    return std::max<u32>(1, u32(std::ceil(p.c_k * scale / (p.eps * p.eps))));
}

u32 skeleton_num_levels(const SkeletonParams& p) {
    double lg = std::log2(double(std::max<u64>(p.V, 2)));
    return u32(std::ceil(p.c_levels * lg)) + 1;
}

SketchLayout make_skeleton_stack_layout(const SkeletonParams& p) {
    if (p.V < 2) throw em_error("skeleton stack needs at least two vertices");
    return make_skeleton_layout(p.V, skeleton_k(p), skeleton_num_levels(p), p.seed, p.c0);
}

SkeletonStack assemble_stack(const SkeletonParams& p, SketchArray arr) {
    SkeletonStack st;
    st.params = p;
    st.k = skeleton_k(p);
    st.num_levels = skeleton_num_levels(p);
    if (arr.layout.sections.size() != u64(st.k) * st.num_levels)
        throw em_error("array does not match the stack geometry");
    st.arr = std::move(arr);
    return st;
}

LevelCut level_cut(BlockDevice& dev, const SkeletonStack& st, u32 level) {
    assert(level < st.num_levels);
    SketchArray slice = slice_sections(dev, st.arr, u32(u64(level) * st.k), st.k);
    Certificate cert = extract_certificate(dev, std::move(slice));
    MinCutResult mc = min_cut_upto_k(dev, cert, st.k);
    ext_free(dev, cert.edges);
    LevelCut lc;
    lc.lambda = mc.value;
    lc.saturated = mc.saturated;
    lc.side = std::move(mc.side);
    return lc;
}

CutEstimate approx_min_cut(BlockDevice& dev, const SkeletonStack& st) {
    const u32 L = st.num_levels - 1;
    std::map<u32, LevelCut> probes;
    auto probe = [&](u32 i) -> const LevelCut& {
        auto it = probes.find(i);
        if (it == probes.end()) it = probes.emplace(i, level_cut(dev, st, i)).first;
        return it->second;
    };
    auto open = [&](u32 i) { return !probe(i).saturated; };

    u32 j;
    if (open(0)) {
        j = 0;
    } else if (!open(L)) {
        throw saturation_error("every skeleton level is saturated; raise k");
    } else {
        u32 lo = 0, hi = L;
        while (hi - lo > 1) {
            u32 mid = lo + (hi - lo) / 2;
            (open(mid) ? hi : lo) = mid;
        }
        j = hi;
    }

    // the search leans on capped level cuts falling as levels thin out;
    // any probed inversion voids it and we rescan from the bottom
    bool inverted = false;
    u64 prev = UINT64_MAX;
    for (const auto& [i, lc] : probes) {
        (void)i;
        u64 capped = std::min<u64>(lc.lambda, st.k);
        if (capped > prev) inverted = true;
        prev = capped;
    }
    bool fb = false;
    if (inverted || (j > 0 && open(j - 1))) {
        fb = true;
        j = 0;
        while (!open(j)) ++j;
    }

    const LevelCut& best = probe(j);
    CutEstimate est;
    est.value = best.lambda << j;
    est.level = j;
    est.level_lambda = best.lambda;
    est.fallback = fb;
    est.levels_probed = probes.size();
    est.side = best.side;
    return est;
}

namespace {

struct MarkEdge {
    u64 u, v, m;
};

} // namespace

ExtVec<EdgeKey> recover_cut_edges(BlockDevice& dev, const std::vector<u64>& side,
                                  const ExtVec<EdgeKey>& edges) {
    std::vector<u64> S = side;
    std::sort(S.begin(), S.end());
    S.erase(std::unique(S.begin(), S.end()), S.end());
    ExtVec<u64> sv = ext_store_all(dev, S);

    ExtVec<MarkEdge> m0 =
        ext_scan<MarkEdge>(dev, edges, [](const EdgeKey& e) { return MarkEdge{e.u, e.v, 0}; });

    // one merge join per orientation, flipping the mark on each endpoint
    // found in S; edges with exactly one flip cross the cut
    auto join = [&](ExtVec<MarkEdge> in, auto key) {
        ExtVec<MarkEdge> srt = ext_sort_by(dev, in, key);
        ext_free(dev, in);
        ExtVec<MarkEdge> out = ext_alloc<MarkEdge>(dev, srt.size());
        {
            ExtReader<MarkEdge> r(dev, srt);
            ExtReader<u64> sr(dev, sv);
            ExtWriter<MarkEdge> w(dev, out);
            while (!r.done()) {
                MarkEdge e = r.next();
                while (!sr.done() && sr.peek() < key(e)) sr.advance();
                if (!sr.done() && sr.peek() == key(e)) e.m ^= 1;
                w.push(e);
            }
            w.flush();
        }
        ext_free(dev, srt);
        return out;
    };
    ExtVec<MarkEdge> m1 = join(m0, [](const MarkEdge& e) { return e.u; });
    ExtVec<MarkEdge> m2 = join(m1, [](const MarkEdge& e) { return e.v; });

    ExtVec<EdgeKey> out = ext_alloc<EdgeKey>(dev, std::max<u64>(edges.size(), 1));
    u64 n = 0;
    {
        ExtReader<MarkEdge> r(dev, m2);
        ExtWriter<EdgeKey> w(dev, out);
        while (!r.done()) {
            MarkEdge e = r.next();
            if (e.m) {
                w.push(EdgeKey{e.u, e.v});
                ++n;
            }
        }
        w.flush();
    }
    ext_free(dev, m2);
    ext_free(dev, sv);
    ext_shrink(dev, out, n);
    return out;
}

Sparsifier build_sparsifier(BlockDevice& dev, const SkeletonStack& st) {
    const u64 V = st.params.V;
    if (V > 2048) throw em_error("sparsifier solver limited to 2048 vertices");
    const u32 k = st.k, L = st.num_levels;

    std::vector<std::vector<EdgeKey>> lvl(L);
    std::vector<std::set<std::pair<u64, u64>>> have(L);
    for (u32 i = 0; i < L; ++i) {
        SketchArray slice = slice_sections(dev, st.arr, u32(u64(i) * k), k);
        Certificate cert = extract_certificate(dev, std::move(slice));
        std::vector<ForestEdge> fe = ext_load_all(dev, cert.edges);
        ext_free(dev, cert.edges);
        lvl[i].reserve(fe.size());
        for (const ForestEdge& f : fe) {
            lvl[i].push_back(EdgeKey{f.u, f.v});
            have[i].insert({f.u, f.v});
        }
    }

    std::set<std::pair<u64, u64>> uniq;
    for (const auto& es : lvl)
        for (const EdgeKey& e : es) uniq.insert({e.u, e.v});

    Sparsifier h;
    h.V = V;
    for (const auto& [u, v] : uniq) {
        std::map<u32, u64> lam; // endpoint connectivity per level, capped at k
        auto lam_at = [&](u32 i) {
            auto it = lam.find(i);
            if (it == lam.end())
                it = lam.emplace(i, st_connectivity_upto(V, lvl[i], u, v, k)).first;
            return it->second;
        };
        auto open = [&](u32 i) { return lam_at(i) < k; };

        u32 j;
        if (open(0)) {
            j = 0;
        } else if (!open(L - 1)) {
            throw saturation_error("edge connectivity saturated on every level; raise k");
        } else {
            u32 lo = 0, hi = L - 1;
            while (hi - lo > 1) {
                u32 mid = lo + (hi - lo) / 2;
                (open(mid) ? hi : lo) = mid;
            }
            j = hi;
        }

        bool inverted = false;
        u64 prev = UINT64_MAX;
        for (const auto& [i, lv] : lam) {
            (void)i;
            if (lv > prev) inverted = true;
            prev = lv;
        }
        if (inverted || (j > 0 && open(j - 1))) {
            h.fallback = true;
            j = 0;
            while (!open(j)) ++j;
        }

        if (have[j].count({u, v})) h.edges.push_back({u, v, u64(1) << j});
    }
    return h;
}

u64 query_st_cut(const Sparsifier& h, u64 s, u64 t) {
    if (s == t) throw em_error("s and t coincide");
    if (s >= h.V || t >= h.V) throw em_error("query vertex out of range");
    return st_min_cut_weighted(h.V, h.edges, s, t);
}

} // namespace emsk
