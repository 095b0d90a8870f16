#include "emsk/ext_wide.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <vector>

namespace emsk {

ExtVec<word> wide_sort(BlockDevice& dev, ExtVec<word> data, u64 stride, u64 key_off) {
    const u64 M = dev.M(), B = dev.B();
    assert(stride > 0 && key_off < stride && data.size() % stride == 0);
    if (stride > M / 4) throw em_error("record too wide to sort");
    const u64 n = data.size() / stride;

    u64 run_recs = std::max<u64>(1, (M / 4) / stride);
    std::vector<u64> bounds;
    bounds.push_back(0);
    ExtVec<word> cur = ext_alloc<word>(dev, data.size());
    {
        RamCharge charge(dev, 2 * run_recs * stride);
        std::vector<word> ram(run_recs * stride);
        std::vector<u32> order(run_recs);
        u64 base_in = data.arr.word_off, base_out = cur.arr.word_off;
        for (u64 first = 0; first < n; first += run_recs) {
            u64 cnt = std::min(run_recs, n - first);
            dev.read(base_in + first * stride, {ram.data(), cnt * stride});
            order.resize(cnt);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](u32 a, u32 b) {
                return ram[u64(a) * stride + key_off] < ram[u64(b) * stride + key_off];
            });
            std::vector<word> out(cnt * stride);
            for (u64 i = 0; i < cnt; ++i)
                std::copy_n(ram.begin() + i64(order[i] * stride), stride,
                            out.begin() + i64(i * stride));
            dev.write(base_out + first * stride, out);
            bounds.push_back(first + cnt);
        }
    }
    ext_free(dev, data);
    if (n == 0) return cur;

    u64 fan = std::max<u64>(2, (M / 2) / (B + stride));
    while (bounds.size() > 2) {
        std::vector<u64> nbounds;
        nbounds.push_back(0);
        ExtVec<word> nxt = ext_alloc<word>(dev, cur.size());
        u64 out_pos = 0;
        std::vector<word> rec(stride);
        RamCharge rec_charge(dev, stride);
        for (u64 r = 0; r + 1 < bounds.size(); r += fan) {
            u64 runs = std::min(fan, bounds.size() - 1 - r);
            std::vector<WideReader> cs;
            cs.reserve(runs);
            for (u64 i = 0; i < runs; ++i)
                cs.emplace_back(dev, cur, stride, bounds[r + i], bounds[r + i + 1]);
            using Item = std::pair<u64, u64>; // key, run index
            auto after = [](const Item& a, const Item& b) {
                return a.first > b.first || (a.first == b.first && a.second > b.second);
            };
            std::priority_queue<Item, std::vector<Item>, decltype(after)> heap(after);
            for (u64 i = 0; i < runs; ++i)
                if (!cs[i].done()) heap.push({cs[i].peek_word(key_off), i});
            std::vector<word> outbuf(B);
            u64 outfill = 0, outblk_base = nxt.arr.word_off + out_pos * stride;
            RamCharge out_charge(dev, B);
            auto spill = [&](bool final_flush) {
                if (outfill == 0) return;
                if (final_flush || outfill == B) {
                    dev.write(outblk_base, {outbuf.data(), outfill});
                    outblk_base += outfill;
                    outfill = 0;
                }
            };
            while (!heap.empty()) {
                auto [k, i] = heap.top();
                heap.pop();
                cs[i].read(rec);
                for (u64 w = 0; w < stride; ++w) {
                    outbuf[outfill++] = rec[w];
                    spill(false);
                }
                ++out_pos;
                if (!cs[i].done()) heap.push({cs[i].peek_word(key_off), i});
            }
            spill(true);
            nbounds.push_back(out_pos);
        }
        ext_free(dev, cur);
        cur = nxt;
        bounds = nbounds;
    }
    return cur;
}

} // namespace emsk
