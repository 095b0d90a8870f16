#include "emsk/kconn.hpp"

#include <algorithm>
#include <bit>
#include <memory>

namespace emsk {

namespace {

SketchLayout layer_layout(const SketchLayout& L, u32 i) {
    SketchLayout li;
    li.num_units = L.num_units;
    li.V = L.V;
    li.kind = L.kind;
    li.r = L.r;
    li.counter_words = L.counter_words;
    li.code_space = L.code_space;
    li.subsample_seed = L.subsample_seed;
    li.sections.push_back(L.sections[i]);
    return li;
}

// One sorted update list applied to one layer: read-modify-write each
// touched record in ascending unit order.
void rmw_apply(BlockDevice& dev, SketchArray& s, const ExtVec<TaggedUpdate>& ups) {
    const u64 uw = s.layout.unit_words();
    RamCharge charge(dev, uw);
    std::vector<word> rec(uw);
    ExtReader<TaggedUpdate> r(dev, ups);
    while (!r.done()) {
        u64 unit = r.peek().target();
        assert(unit < s.layout.num_units);
        u64 off = s.data.arr.word_off + unit * uw;
        dev.read(off, rec);
        while (!r.done() && r.peek().target() == unit)
            sketch_apply({rec.data(), uw}, s.layout, r.next());
        dev.write(off, rec);
    }
}

struct DeletionRun {
    BlockDevice& dev;
    ExtVec<TaggedUpdate> ups;
    std::vector<EdgeKey> edges; // kept only when an observer wants them

    DeletionRun(BlockDevice& d, u64 V, std::span<const ExtVec<EdgeKey>* const> sources,
                bool keep_edges)
        : dev(d) {
        u64 total = 0;
        for (const ExtVec<EdgeKey>* f : sources) total += f->size();
        ExtVec<TaggedUpdate> raw = ext_alloc<TaggedUpdate>(dev, 2 * total);
        {
            ExtWriter<TaggedUpdate> w(dev, raw);
            for (const ExtVec<EdgeKey>* f : sources) {
                ExtReader<EdgeKey> r(dev, *f);
                while (!r.done()) {
                    EdgeKey e = r.next();
                    u64 code = edge_code(e.u, e.v, V);
                    w.push(TaggedUpdate::make(e.u, 0, 0, -1, code));
                    w.push(TaggedUpdate::make(e.v, 1, 0, -1, code));
                    if (keep_edges) edges.push_back(e);
                }
            }
            w.flush();
        }
        ups = ext_sort_by(dev, raw, [](const TaggedUpdate& u) { return u.target(); });
        ext_free(dev, raw);
    }
    ~DeletionRun() { ext_free(dev, ups); }
};

} // namespace

std::vector<SketchArray> split_layers(BlockDevice& dev, SketchArray arr) {
    const SketchLayout L = arr.layout;
    const u64 V = L.num_units;
    const u32 k = u32(L.sections.size());
    if (k == 0) throw em_error("layout has no sections");

    std::vector<SketchArray> out;
    out.reserve(k);
    for (u32 i = 0; i < k; ++i) {
        SketchLayout li = layer_layout(L, i);
        out.push_back({li, ext_alloc<word>(dev, V * li.unit_words())});
    }

    {
        WideReader rd(dev, arr.data, L.unit_words());
        std::vector<std::unique_ptr<WideWriter>> ws;
        ws.reserve(k);
        for (u32 i = 0; i < k; ++i) ws.push_back(std::make_unique<WideWriter>(dev, out[i].data));
        RamCharge charge(dev, L.counter_words + 1);
        std::vector<word> cbuf(L.counter_words);
        while (!rd.done()) {
            for (u64 c = 0; c < L.counter_words; ++c) cbuf[c] = rd.peek_word(c);
            u64 off = L.counter_words;
            for (u32 i = 0; i < k; ++i) {
                for (u64 c = 0; c < L.counter_words; ++c) ws[i]->put(cbuf[c]);
                u64 bank = L.sections[i].params.bank_words();
                for (u64 t = 0; t < bank; ++t) ws[i]->put(rd.peek_word(off++));
            }
            rd.skip();
        }
        for (u32 i = 0; i < k; ++i) ws[i]->flush();
    }
    ext_free(dev, arr.data);
    return out;
}

Certificate extract_certificate(BlockDevice& dev, SketchArray arr, const KconnConfig& cfg) {
    const u64 V = arr.layout.V;
    const u32 k = u32(arr.layout.sections.size());
    if (k == 0) throw em_error("layout has no sections");

    Certificate cert;
    cert.V = V;
    cert.k = k;
    cert.stats.layer_failed.assign(k, 0);
    cert.stats.forest_sizes.assign(k, 0);

    u64 before = dev.io_snapshot().total();
    std::vector<SketchArray> layers = split_layers(dev, std::move(arr));
    cert.stats.split_io = dev.io_snapshot().total() - before;

    u64 lg = ceil_log2(std::max<u64>(V, 2));
    u64 blk = cfg.block_forests ? cfg.block_forests : std::max<u64>(1, lg * lg);

    auto emit = [&](KconnEvent::Kind kind, u32 layer, std::vector<EdgeKey> edges) {
        if (cfg.observer) cfg.observer(KconnEvent{kind, layer, std::move(edges)});
    };

    // one sort of the combined sources, one read-modify-write pass per
    // target layer
    std::vector<ExtVec<EdgeKey>> forests(k);
    auto apply_block = [&](std::span<const u32> source_layers, u32 t_lo, u32 t_hi) {
        u64 total = 0;
        std::vector<const ExtVec<EdgeKey>*> src;
        for (u32 s : source_layers) {
            if (forests[s].size() == 0) continue;
            src.push_back(&forests[s]);
            total += forests[s].size();
        }
        if (total == 0 || t_lo >= t_hi) return;
        u64 t0 = dev.io_snapshot().total();
        DeletionRun run(dev, V, src, bool(cfg.observer));
        for (u32 t = t_lo; t < t_hi; ++t) {
            rmw_apply(dev, layers[t], run.ups);
            ++cert.stats.delete_passes;
            emit(KconnEvent::Kind::deletion, t, run.edges);
        }
        cert.stats.delete_io += dev.io_snapshot().total() - t0;
    };

    for (u32 i = 0; i < k; ++i) {
        if (cfg.schedule == DeletionSchedule::logarithmic && i % blk == 0 && i > 0) {
            u64 b = i / blk;
            u64 span = u64(1) << std::countr_zero(b);
            std::vector<u32> src_layers;
            for (u64 j = (b - span) * blk; j < b * blk; ++j) src_layers.push_back(u32(j));
            u32 t_hi = u32(std::min<u64>((b + span) * blk, k));
            apply_block(src_layers, i, t_hi);
        }

        emit(KconnEvent::Kind::query, i, {});
        u64 q0 = dev.io_snapshot().total();
        CcResult cc = boruvka_extract(dev, std::move(layers[i]));
        cert.stats.extract_io += dev.io_snapshot().total() - q0;
        ext_free(dev, cc.labels);
        forests[i] = cc.forest;
        cert.stats.forest_sizes[i] = forests[i].size();
        cert.stats.layer_failed[i] = cc.stats.hit_round_cap;

        std::vector<u32> self = {i};
        if (cfg.schedule == DeletionSchedule::naive) {
            apply_block(self, i + 1, k);
        } else {
            u32 block_end = u32(std::min<u64>((u64(i) / blk + 1) * blk, k));
            apply_block(self, i + 1, block_end);
        }
    }

    u64 total_edges = 0;
    for (u32 i = 0; i < k; ++i) total_edges += forests[i].size();
    cert.edges = ext_alloc<ForestEdge>(dev, std::max<u64>(total_edges, 1));
    {
        ExtWriter<ForestEdge> w(dev, cert.edges);
        for (u32 i = 0; i < k; ++i) {
            ExtReader<EdgeKey> r(dev, forests[i]);
            while (!r.done()) {
                EdgeKey e = r.next();
                w.push({e.u, e.v, i});
            }
            ext_free(dev, forests[i]);
        }
        w.flush();
    }
    ext_shrink(dev, cert.edges, total_edges);
    return cert;
}

namespace {

struct SwResult {
    u64 best = 0;
    std::vector<u64> side;
};

// contraction phases over a dense weight matrix; fine at certificate
// scale, guarded above it
SwResult stoer_wagner(u64 V, const std::vector<std::pair<u64, u64>>& edges) {
    u32 n = u32(V);
    std::vector<std::vector<u64>> w(n, std::vector<u64>(n, 0));
    for (auto [a, b] : edges) {
        w[a][b] += 1;
        w[b][a] += 1;
    }
    std::vector<std::vector<u64>> grp(n);
    std::vector<u32> active(n);
    for (u32 i = 0; i < n; ++i) {
        grp[i] = {i};
        active[i] = i;
    }
    SwResult res{u64(-1), {}};
    while (active.size() > 1) {
        std::vector<u64> conn(n, 0);
        std::vector<unsigned char> in(n, 0);
        std::vector<u32> order;
        for (u64 step = 0; step < active.size(); ++step) {
            u32 pick = n;
            for (u32 v : active)
                if (!in[v] && (pick == n || conn[v] > conn[pick])) pick = v;
            in[pick] = 1;
            order.push_back(pick);
            for (u32 v : active)
                if (!in[v]) conn[v] += w[pick][v];
        }
        u32 t = order[order.size() - 1], s = order[order.size() - 2];
        if (conn[t] < res.best) {
            res.best = conn[t];
            res.side = grp[t];
        }
        grp[s].insert(grp[s].end(), grp[t].begin(), grp[t].end());
        for (u32 v : active) {
            if (v == s || v == t) continue;
            w[s][v] += w[t][v];
            w[v][s] = w[s][v];
        }
        w[s][t] = w[t][s] = 0;
        active.erase(std::find(active.begin(), active.end(), t));
    }
    return res;
}

} // namespace

MinCutResult min_cut_upto_k(BlockDevice& dev, const Certificate& cert, u64 k) {
    if (cert.V == 0) throw em_error("empty certificate");
    if (cert.V > 2048) throw em_error("certificate too large for the in-memory cut solver");
    MinCutResult out;
    if (cert.V == 1) {
        out.value = k;
        out.saturated = true;
        return out;
    }
    std::vector<std::pair<u64, u64>> edges;
    edges.reserve(cert.edges.size());
    ExtReader<ForestEdge> r(dev, cert.edges);
    while (!r.done()) {
        ForestEdge e = r.next();
        edges.push_back({e.u, e.v});
    }
    SwResult sw = stoer_wagner(cert.V, edges);
    out.value = sw.best;
    out.saturated = sw.best >= k;
    if (!out.saturated) {
        out.side = sw.side;
        std::sort(out.side.begin(), out.side.end());
    }
    return out;
}

} // namespace emsk
