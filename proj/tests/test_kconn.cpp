#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "emsk/boruvka.hpp"
#include "emsk/io_bounds.hpp"
#include "emsk/kconn.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace emsk;
using namespace emsk::testing;

namespace {

SketchArray ingest_ops(BlockDevice& dev, const SketchLayout& L, const std::vector<StreamOp>& ops) {
    IngestState st(dev, L);
    for (const StreamOp& op : ops) st.feed_edge(op.e, op.delta);
    return st.finalize();
}

Certificate run_kconn(BlockDevice& dev, u64 V, u32 k, u64 seed, const std::vector<StreamOp>& ops,
                      KconnConfig cfg = {}) {
    SketchLayout L = make_kconn_layout(V, k, seed);
    return extract_certificate(dev, ingest_ops(dev, L, ops), cfg);
}

std::vector<std::vector<oracle::Edge>> forest_sets(BlockDevice& dev, const Certificate& cert) {
    std::vector<std::vector<oracle::Edge>> out(cert.k);
    ExtReader<ForestEdge> r(dev, cert.edges);
    while (!r.done()) {
        ForestEdge e = r.next();
        out[e.layer].push_back({e.u, e.v});
    }
    return out;
}

std::vector<StreamOp> complete_graph(u64 V) {
    std::vector<StreamOp> ops;
    for (u64 u = 0; u < V; ++u)
        for (u64 v = u + 1; v < V; ++v) ops.push_back({{u, v}, +1});
    return ops;
}

u64 global_lambda(u64 V, const std::vector<oracle::Edge>& edges) {
    if (V <= 1) return u64(-1);
    if (oracle::cc_count(V, edges) > 1) return 0;
    u64 best = u64(-1);
    for (u64 t = 1; t < V; ++t) best = std::min(best, oracle::edge_connectivity(V, edges, 0, t));
    return best;
}

} // namespace

TEST_CASE("split_layers matches per-section slices") {
    Rng rng(404);
    BlockDevice dev({u64(1) << 14, u64(1) << 7});
    const u64 V = 12;
    SketchLayout L = make_kconn_layout(V, 3, 88);
    std::vector<StreamOp> ops = gen_stream(rng, V, 24, 0.2);
    SketchArray arr = ingest_ops(dev, L, ops);

    std::vector<std::vector<word>> want;
    for (u32 i = 0; i < 3; ++i) {
        SketchArray sl = slice_sections(dev, arr, i, 1);
        want.push_back(ext_load_all(dev, sl.data));
        ext_free(dev, sl.data);
    }
    std::vector<SketchArray> layers = split_layers(dev, std::move(arr));
    REQUIRE(layers.size() == 3);
    for (u32 i = 0; i < 3; ++i) {
        CHECK(layers[i].layout.sections.size() == 1);
        CHECK(layers[i].layout.sections[0].params.seed == L.sections[i].params.seed);
        CHECK(ext_load_all(dev, layers[i].data) == want[i]);
        ext_free(dev, layers[i].data);
    }
    CHECK(dev.ram().high_water() <= dev.M());
}

TEST_CASE("split_layers keeps gated sections intact") {
    BlockDevice dev({u64(1) << 14, u64(1) << 7});
    SketchLayout L = make_skeleton_layout(8, 2, 3, 7);
    SketchArray arr = ingest_ops(dev, L, {{{0, 1}, +1}, {{2, 5}, +1}});
    std::vector<SketchArray> layers = split_layers(dev, std::move(arr));
    REQUIRE(layers.size() == 6);
    for (u32 i = 0; i < 6; ++i) {
        CHECK(layers[i].layout.sections[0].gate == L.sections[i].gate);
        CHECK(layers[i].layout.sections[0].gate_arg == L.sections[i].gate_arg);
        CHECK(layers[i].layout.subsample_seed == L.subsample_seed);
        ext_free(dev, layers[i].data);
    }
}

TEST_CASE("a tree fills only the first forest") {
    Rng rng(17);
    BlockDevice dev({u64(1) << 14, u64(1) << 7});
    const u64 V = 10;
    std::vector<StreamOp> ops;
    for (u64 v = 1; v < V; ++v) ops.push_back({{rng.next_below(v), v}, +1});
    Certificate cert = run_kconn(dev, V, 3, 51, ops);

    std::set<oracle::Edge> tree;
    for (const StreamOp& op : ops) tree.insert({op.e.u, op.e.v});
    auto fs = forest_sets(dev, cert);
    CHECK(std::set<oracle::Edge>(fs[0].begin(), fs[0].end()) == tree);
    CHECK(fs[1].empty());
    CHECK(fs[2].empty());
    ext_free(dev, cert.edges);
}

TEST_CASE("a six cycle peels into a path forest and the leftover edge") {
    BlockDevice dev({u64(1) << 14, u64(1) << 7});
    const u64 V = 6;
    std::vector<StreamOp> ops;
    for (u64 v = 0; v < V; ++v) ops.push_back({{std::min(v, (v + 1) % V), std::max(v, (v + 1) % V)}, +1});
    Certificate cert = run_kconn(dev, V, 2, 3, ops);

    auto fs = forest_sets(dev, cert);
    CHECK(fs[0].size() == 5);
    CHECK(fs[1].size() == 1);
    std::set<oracle::Edge> all(fs[0].begin(), fs[0].end());
    for (const auto& e : fs[1]) CHECK(all.insert(e).second);
    std::set<oracle::Edge> cycle;
    for (const StreamOp& op : ops) cycle.insert({op.e.u, op.e.v});
    CHECK(all == cycle);
    ext_free(dev, cert.edges);
}

TEST_CASE("a complete graph certificate is k edge connected") {
    BlockDevice dev({u64(1) << 14, u64(1) << 7});
    Certificate cert = run_kconn(dev, 5, 3, 77, complete_graph(5));
    auto fs = forest_sets(dev, cert);
    std::vector<oracle::Edge> all;
    for (const auto& f : fs) all.insert(all.end(), f.begin(), f.end());
    CHECK(global_lambda(5, all) >= 3);
    MinCutResult mc = min_cut_upto_k(dev, cert, 3);
    CHECK(mc.saturated);
    CHECK(mc.value >= 3);
    ext_free(dev, cert.edges);
}

TEST_CASE("random certificates preserve cuts up to k") {
    const u64 trials = 50;
    u64 good = 0;
    for (u64 t = 0; t < trials; ++t) {
        static const u64 sizes[] = {10, 14, 18, 24};
        u64 V = sizes[t % 4];
        u32 k = 2 + u32(t % 5);
        Rng rng(6100 + t);
        std::vector<StreamOp> ops = gen_stream(rng, V, 4 * V, 0.25);
        std::set<std::pair<u64, u64>> fs_set = final_edges(ops);
        std::vector<oracle::Edge> surv(fs_set.begin(), fs_set.end());

        BlockDevice dev({u64(1) << 14, u64(1) << 7});
        Certificate cert = run_kconn(dev, V, k, 6200 + t, ops);
        CHECK(dev.ram().high_water() <= dev.M());

        auto forests = forest_sets(dev, cert);
        bool clean = true;
        for (unsigned char f : cert.stats.layer_failed) clean = clean && !f;

        // disjointness and containment hold unconditionally
        std::set<oracle::Edge> seen;
        for (const auto& f : forests)
            for (const auto& e : f) {
                CHECK(fs_set.count(e) == 1);
                CHECK(seen.insert(e).second);
            }

        // peeling structure: each forest spans what the earlier ones left
        bool structural = true;
        std::set<oracle::Edge> remaining = fs_set;
        for (u32 i = 0; i < cert.k; ++i) {
            std::vector<oracle::Edge> rem(remaining.begin(), remaining.end());
            structural = structural && oracle::valid_spanning_forest(V, rem, forests[i]);
            for (const auto& e : forests[i]) remaining.erase(e);
        }

        std::vector<oracle::Edge> all;
        for (const auto& f : forests) all.insert(all.end(), f.begin(), f.end());
        u64 lam_g = global_lambda(V, surv);
        u64 lam_h = global_lambda(V, all);
        MinCutResult mc = min_cut_upto_k(dev, cert, k);
        CHECK(mc.value == lam_h);
        CHECK(mc.saturated == (lam_h >= k));
        if (!mc.saturated) {
            CHECK(!mc.side.empty());
            CHECK(mc.side.size() < V);
            // the witness shore must realize the reported cut value
            std::set<u64> shore(mc.side.begin(), mc.side.end());
            u64 crossing = 0;
            for (const auto& [a, b] : all) crossing += shore.count(a) != shore.count(b);
            CHECK(crossing == mc.value);
        }

        bool agrees = std::min(lam_h, u64(k)) == std::min(lam_g, u64(k));
        good += structural && agrees && clean;
    }
    CHECK(good * 100 >= trials * 98);
}

TEST_CASE("the deletion ledger balances before every query") {
    struct Case {
        u64 V;
        u32 k;
        u64 blk;
        std::vector<StreamOp> ops;
    };
    Rng rng(52);
    std::vector<Case> cases;
    cases.push_back({16, 8, 1, complete_graph(16)});
    cases.push_back({20, 6, 2, gen_stream(rng, 20, 70, 0.25)});
    cases.push_back({12, 5, 0, gen_stream(rng, 12, 40, 0.2)});

    for (const Case& c : cases) {
        std::vector<KconnEvent> events;
        KconnConfig cfg;
        cfg.block_forests = c.blk;
        cfg.observer = [&](const KconnEvent& e) { events.push_back(e); };

        BlockDevice dev({u64(1) << 14, u64(1) << 7});
        Certificate cert = run_kconn(dev, c.V, c.k, 9999, c.ops, cfg);
        auto forests = forest_sets(dev, cert);

        std::vector<std::multiset<oracle::Edge>> deleted(c.k);
        u32 next_query = 0;
        for (const KconnEvent& e : events) {
            if (e.kind == KconnEvent::Kind::query) {
                REQUIRE(e.layer == next_query);
                std::multiset<oracle::Edge> want;
                for (u32 j = 0; j < e.layer; ++j)
                    for (const auto& f : forests[j]) want.insert(f);
                CHECK(deleted[e.layer] == want);
                ++next_query;
            } else {
                CHECK(e.layer >= next_query);
                for (const EdgeKey& ek : e.edges) deleted[e.layer].insert({ek.u, ek.v});
            }
        }
        CHECK(next_query == c.k);
        ext_free(dev, cert.edges);
    }
}

TEST_CASE("logarithmic schedule beats naive by the block ratio") {
    const u64 V = 32;
    const u32 k = 16;
    std::vector<StreamOp> ops = complete_graph(V);

    KconnConfig log_cfg;
    log_cfg.block_forests = 1;
    KconnConfig naive_cfg;
    naive_cfg.block_forests = 1;
    naive_cfg.schedule = DeletionSchedule::naive;

    BlockDevice d1({u64(1) << 14, u64(1) << 7});
    Certificate a = run_kconn(d1, V, k, 31, ops, log_cfg);
    BlockDevice d2({u64(1) << 14, u64(1) << 7});
    Certificate b = run_kconn(d2, V, k, 31, ops, naive_cfg);

    // deletion timing must not change what gets extracted
    auto fa = forest_sets(d1, a);
    auto fb = forest_sets(d2, b);
    CHECK(fa == fb);
    // lambda(K_V) = V-1 >= k, so every residual keeps edges and the
    // certificate must saturate at k even though late forests may be
    // smaller than spanning trees
    u64 total = 0;
    for (u64 s : a.stats.forest_sizes) {
        CHECK(s >= 1);
        total += s;
    }
    CHECK(total <= V * (V - 1) / 2);
    MinCutResult mc = min_cut_upto_k(d1, a, k);
    CHECK(mc.saturated);

    REQUIRE(a.stats.delete_io > 0);
    REQUIRE(b.stats.delete_io > 0);
    double kp = 16.0; // one layer per block
    CHECK(double(a.stats.delete_io) <=
          (std::log2(kp) + 1.0) / kp * double(b.stats.delete_io));

    u64 layer_words = V * make_kconn_layout(V, k, 31).sections[0].params.bank_words();
    double profile = kDeleteBudget * kp * std::log2(kp) * scan_cost_blocks(layer_words, d1.B());
    CHECK(double(a.stats.delete_io) <= profile);

    ext_free(d1, a.edges);
    ext_free(d2, b.edges);
}

TEST_CASE("minimum cut reports shores for sparse certificates") {
    BlockDevice dev({u64(1) << 14, u64(1) << 7});
    const u64 V = 8;
    // two squares joined by one bridge
    std::vector<StreamOp> ops = {{{0, 1}, +1}, {{1, 2}, +1}, {{2, 3}, +1}, {{0, 3}, +1},
                                 {{4, 5}, +1}, {{5, 6}, +1}, {{6, 7}, +1}, {{4, 7}, +1},
                                 {{3, 4}, +1}};
    Certificate cert = run_kconn(dev, V, 3, 12, ops);
    MinCutResult mc = min_cut_upto_k(dev, cert, 3);
    CHECK(!mc.saturated);
    CHECK(mc.value == 1);
    std::vector<u64> lo = {0, 1, 2, 3}, hi = {4, 5, 6, 7};
    CHECK((mc.side == lo || mc.side == hi));
    ext_free(dev, cert.edges);

    Certificate disc = run_kconn(dev, 6, 2, 13,
                                 {{{0, 1}, +1}, {{1, 2}, +1}, {{3, 4}, +1}, {{4, 5}, +1}});
    MinCutResult mc2 = min_cut_upto_k(dev, disc, 2);
    CHECK(!mc2.saturated);
    CHECK(mc2.value == 0);
    ext_free(dev, disc.edges);
}
