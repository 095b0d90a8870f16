#pragma once

#include <algorithm>
#include <cmath>
#include <queue>

#include "emsk/ext_vec.hpp"

namespace emsk {

// Cost predictors with unit constants. Tests and the io-report compare
// measured block counts against these, scaled by the documented constants
// in io_bounds.hpp.

inline double scan_cost_blocks(u64 words, u64 B) {
    return words == 0 ? 0.0 : double(ceil_div(words, B));
}

// ceil(log_{M/B}(W/B)), taken as 0 once the input fits in RAM
inline double merge_depth(u64 words, u64 M, u64 B) {
    if (words <= M) return 0.0;
    double nb = double(ceil_div(words, B));
    return std::ceil(std::log(nb) / std::log(double(M) / double(B)));
}

inline double sort_cost_blocks(u64 words, u64 M, u64 B) {
    if (words == 0) return 0.0;
    return double(ceil_div(words, B)) * (1.0 + merge_depth(words, M, B));
}

inline double permute_cost_blocks(u64 length, u64 rec_words, u64 M, u64 B) {
    if (length == 0) return 0.0;
    return std::min(double(length), sort_cost_blocks(length * (rec_words + 1), M, B));
}

// --- scan -------------------------------------------------------------

template <class TOut, class TIn, class F>
ExtVec<TOut> ext_scan(BlockDevice& dev, const ExtVec<TIn>& in, F f) {
    ExtVec<TOut> out = ext_alloc<TOut>(dev, in.size());
    ExtReader<TIn> r(dev, in);
    ExtWriter<TOut> w(dev, out);
    while (!r.done()) w.push(f(r.next()));
    w.flush();
    return out;
}

template <class TIn, class F>
void ext_for_each(BlockDevice& dev, const ExtVec<TIn>& in, F f) {
    for (ExtReader<TIn> r(dev, in); !r.done();) f(r.next());
}

template <class T, class F>
ExtVec<T> ext_generate(BlockDevice& dev, u64 n, F f) {
    ExtVec<T> out = ext_alloc<T>(dev, n);
    ExtWriter<T> w(dev, out);
    for (u64 i = 0; i < n; ++i) w.push(f(i));
    w.flush();
    return out;
}

// --- sort -------------------------------------------------------------

namespace detail {

template <class T, class Less>
void merge_runs(BlockDevice& dev, const ExtVec<T>& src, const std::vector<u64>& bounds,
                u64 first_run, u64 n_runs, ExtWriter<T>& out, Less less) {
    struct Cur {
        T rec;
        u64 run;
    };
    std::vector<ExtReader<T>> readers;
    readers.reserve(n_runs);
    for (u64 i = 0; i < n_runs; ++i) {
        u64 a = bounds[first_run + i], b = bounds[first_run + i + 1];
        readers.emplace_back(dev, src, a, b - a);
    }
    RamCharge heap_charge(dev, n_runs * ExtVec<T>::rec_words);
    // min-heap; ties resolved toward the earlier run to keep the sort stable
    auto after = [&less](const Cur& a, const Cur& b) {
        if (less(b.rec, a.rec)) return true;
        if (less(a.rec, b.rec)) return false;
        return a.run > b.run;
    };
    std::priority_queue<Cur, std::vector<Cur>, decltype(after)> pq(after);
    for (u64 i = 0; i < n_runs; ++i)
        if (!readers[i].done()) pq.push({readers[i].next(), i});
    while (!pq.empty()) {
        Cur c = pq.top();
        pq.pop();
        out.push(c.rec);
        if (!readers[c.run].done()) pq.push({readers[c.run].next(), c.run});
    }
}

} // namespace detail

// Stable external merge sort. Runs of M/2 words, fan-in floor(M/2 / (B+rec)).
template <class T, class Less>
ExtVec<T> ext_sort(BlockDevice& dev, const ExtVec<T>& in, Less less) {
    const u64 rw = ExtVec<T>::rec_words;
    const u64 M = dev.M(), B = dev.B();
    if (rw > M / 4) throw em_error("sort record exceeds run memory");

    ExtVec<T> cur = ext_alloc<T>(dev, in.size());
    std::vector<u64> bounds{0};
    {
        u64 cap = std::max<u64>(1, (M / 2) / rw);
        RamCharge charge(dev, cap * rw);
        std::vector<T> buf;
        buf.reserve(std::min<u64>(cap, in.size()));
        ExtReader<T> r(dev, in);
        ExtWriter<T> w(dev, cur);
        while (!r.done()) {
            buf.clear();
            while (!r.done() && buf.size() < cap) buf.push_back(r.next());
            std::stable_sort(buf.begin(), buf.end(), less);
            for (const T& rec : buf) w.push(rec);
            bounds.push_back(bounds.back() + buf.size());
        }
        w.flush();
    }
    if (bounds.size() <= 2) return cur;

    const u64 fan = std::max<u64>(2, (M / 2) / (B + rw));
    while (bounds.size() - 1 > 1) {
        ExtVec<T> nxt = ext_alloc<T>(dev, in.size());
        std::vector<u64> nb{0};
        {
            ExtWriter<T> w(dev, nxt);
            for (u64 g = 0; g + 1 < bounds.size(); g += fan) {
                u64 runs = std::min<u64>(fan, bounds.size() - 1 - g);
                detail::merge_runs(dev, cur, bounds, g, runs, w, less);
                nb.push_back(w.count());
            }
            w.flush();
        }
        ext_free(dev, cur);
        cur = nxt;
        bounds = std::move(nb);
    }
    return cur;
}

template <class T, class Key>
ExtVec<T> ext_sort_by(BlockDevice& dev, const ExtVec<T>& in, Key key) {
    return ext_sort(dev, in, [key](const T& a, const T& b) { return key(a) < key(b); });
}

// --- permute ----------------------------------------------------------

// Bijective rearrangement: record i moves to slot target(rec, i). Chooses
// direct placement (about 2 I/Os per record) or sort routing, whichever
// the cost model predicts cheaper.
template <class T, class TargetFn>
ExtVec<T> ext_permute(BlockDevice& dev, const ExtVec<T>& in, TargetFn target) {
    const u64 len = in.size();
    const u64 rw = ExtVec<T>::rec_words;
    const u64 M = dev.M(), B = dev.B();
    ExtVec<T> out = ext_alloc<T>(dev, len);
    if (len == 0) return out;

    double direct_cost = 2.0 * double(len) * double(std::max<u64>(1, ceil_div(rw, B)));
    double route_cost = sort_cost_blocks(len * (rw + 1), M, B) + 2.0 * scan_cost_blocks(len * rw, B);

    if (direct_cost <= route_cost) {
        ExtReader<T> r(dev, in);
        RandomWriter w(dev, out.arr);
        u64 i = 0, sum = 0, mixed = 0;
        while (!r.done()) {
            T rec = r.next();
            u64 t = target(rec, i);
            if (t >= len) throw em_error("permute target out of range");
            sum += t;
            mixed ^= mix64(t);
            w.write_record(t, std::span<const word>(reinterpret_cast<const word*>(&rec), rw));
            ++i;
        }
        w.flush();
        u64 esum = 0, emixed = 0;
        for (u64 j = 0; j < len; ++j) {
            esum += j;
            emixed ^= mix64(j);
        }
        if (sum != esum || mixed != emixed) throw em_error("permute targets not a bijection");
    } else {
        struct Routed {
            u64 t;
            T rec;
        };
        u64 idx = 0;
        ExtVec<Routed> tagged = ext_scan<Routed>(dev, in, [&](const T& rec) {
            u64 i = idx++;
            u64 t = target(rec, i);
            if (t >= len) throw em_error("permute target out of range");
            return Routed{t, rec};
        });
        ExtVec<Routed> sorted =
            ext_sort(dev, tagged, [](const Routed& a, const Routed& b) { return a.t < b.t; });
        ext_free(dev, tagged);
        {
            ExtReader<Routed> r(dev, sorted);
            ExtWriter<T> w(dev, out);
            u64 pos = 0;
            while (!r.done()) {
                Routed rt = r.next();
                if (rt.t != pos) throw em_error("permute targets not a bijection");
                w.push(rt.rec);
                ++pos;
            }
            w.flush();
        }
        ext_free(dev, sorted);
    }
    return out;
}

} // namespace emsk
