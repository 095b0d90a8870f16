#include "emsk/sketch.hpp"

#include <algorithm>
#include <cmath>

namespace emsk {

namespace {
constexpr u64 kSeedTagBank = 0x5ec7b4a1;
constexpr u64 kSeedTagGate = 0x9a7e11d3;
constexpr u64 kSeedTagZ = 0x2fd7c001;
constexpr u64 kSeedTagDepth = 0x71e944af;
constexpr u64 kHeaderMagic = 0x656d736b31ULL; // "emsk1"
} // namespace

u64 tuple_code(std::span<const u64> members, u64 V, u32 r) {
    assert(members.size() >= 2 && members.size() <= r);
    u64 base = V + 1;
    u64 code = 0, mult = 1;
    for (u32 i = 0; i < r; ++i) {
        u64 digit;
        if (i < members.size()) {
            digit = members[i];
            assert(digit < V);
            assert(i == 0 || members[i - 1] < digit);
        } else {
            digit = V;
        }
        code += digit * mult;
        mult *= base;
    }
    return code;
}

u32 tuple_decode(u64 code, u64 V, u32 r, std::vector<u64>& members) {
    u64 base = V + 1;
    members.clear();
    u64 digits[256];
    for (u32 i = 0; i < r; ++i) {
        digits[i] = code % base;
        code /= base;
    }
    if (code != 0) return 0;
    u32 s = r;
    while (s > 0 && digits[s - 1] == V) --s;
    if (s < 2) return 0;
    for (u32 i = 0; i < s; ++i) {
        if (digits[i] >= V) return 0;
        if (i > 0 && digits[i - 1] >= digits[i]) return 0;
        members.push_back(digits[i]);
    }
    return s;
}

u32 sampler_depth(const SketchParams& p, u32 copy, u64 coord) {
    u64 h = mix64(p.seed ^ kSeedTagDepth, copy, coord);
    return h == 0 ? 64 : u32(__builtin_ctzll(h));
}

u64 fingerprint_base(const SketchParams& p, u32 copy) {
    return 2 + mix64(p.seed ^ kSeedTagZ, copy) % (m61::P - 3);
}

u32 subsample_depth(u64 subsample_seed, u64 coord) {
    u64 h = mix64(subsample_seed ^ kSeedTagGate, coord);
    return h == 0 ? 64 : u32(__builtin_ctzll(h));
}

u32 default_copies(u64 V, double c0) {
    double l = std::log2(double(std::max<u64>(V, 2)));
    return std::max<u32>(1, u32(std::ceil(c0 * l)));
}

namespace {

struct CoordUpdate {
    u64 coord;
    int coef;
};

u32 expand_update(const SketchLayout& L, const TaggedUpdate& u, CoordUpdate* out) {
    int d = u.delta();
    if (L.kind == CodeKind::edge_pair) {
        out[0] = {u.code, u.pos() == 0 ? d : -d};
        return 1;
    }
    thread_local std::vector<u64> mem;
    u32 s = tuple_decode(u.code, L.V, L.r, mem);
    assert(s >= 2 && u.pos() < s);
    u32 i = u.pos();
    u32 S = pair_slots(L.r);
    u32 n = 0;
    for (u32 j = 0; j < s; ++j) {
        if (j == i) continue;
        u32 a = std::min(i, j), b = std::max(i, j);
        out[n++] = {u.code * S + pair_slot(a, b, L.r), i < j ? d : -d};
    }
    return n;
}

bool section_applies(const SketchLayout& L, const Section& s, const TaggedUpdate& u) {
    switch (s.gate) {
        case GateKind::always: return true;
        case GateKind::min_depth: return subsample_depth(L.subsample_seed, u.code) >= s.gate_arg;
        case GateKind::min_stack: return u.wlevel() <= s.gate_arg;
    }
    return true;
}

inline void bucket_add(word* cell, int coef, u64 coord, u64 fp) {
    cell[0] = u64(i64(cell[0]) + coef);
    cell[1] = u64(i64(cell[1]) + coef * i64(coord));
    cell[2] = coef > 0 ? m61::add(cell[2], fp) : m61::sub(cell[2], fp);
}

} // namespace

void sketch_apply_slice(std::span<word> slice, u64 lo, const SketchLayout& L,
                        const TaggedUpdate& u) {
    u64 hi = lo + slice.size();
    if (L.counter_words > 0 && lo == 0)
        slice[0] = u64(i64(slice[0]) + u.delta());

    CoordUpdate cu[256];
    u32 ncu = expand_update(L, u, cu);

    u64 off = L.counter_words;
    for (const Section& s : L.sections) {
        u64 bank_end = off + s.params.bank_words();
        if (off >= hi) break;
        if (bank_end <= lo || !section_applies(L, s, u)) {
            off = bank_end;
            continue;
        }
        u32 C = s.params.copies, Lv = s.params.levels;
        for (u32 k = 0; k < ncu; ++k) {
            for (u32 c = 0; c < C; ++c) {
                u64 cell0 = off + (u64(c) * Lv) * kBucketWords;
                if (cell0 >= hi) break;
                u32 d = std::min(sampler_depth(s.params, c, cu[k].coord), Lv - 1);
                u64 cells_end = cell0 + u64(d + 1) * kBucketWords;
                if (cells_end <= lo) continue;
                u64 fp = m61::pow(fingerprint_base(s.params, c), cu[k].coord);
                for (u32 l = 0; l <= d; ++l) {
                    u64 cell = cell0 + u64(l) * kBucketWords;
                    if (cell < lo || cell + kBucketWords > hi) continue;
                    bucket_add(&slice[cell - lo], cu[k].coef, cu[k].coord, fp);
                }
            }
        }
        off = bank_end;
    }
}

void vertex_update(std::span<word> record, const SketchLayout& L, EdgeKey e, int delta, u32 side,
                   u32 wlevel) {
    assert(side < 2);
    TaggedUpdate u = TaggedUpdate::make(side == 0 ? e.u : e.v, side, wlevel, delta,
                                        edge_code(e.u, e.v, L.V));
    sketch_apply(record, L, u);
}

void hyper_vertex_update(std::span<word> record, const SketchLayout& L,
                         std::span<const u64> members, u32 position, int delta) {
    assert(L.kind == CodeKind::hyper_tuple && position < members.size());
    TaggedUpdate u = TaggedUpdate::make(members[position], position, 0, delta,
                                        tuple_code(members, L.V, L.r));
    sketch_apply(record, L, u);
}

void sketch_merge_into(std::span<word> dst, std::span<const word> src, const SketchLayout& L) {
    assert(dst.size() == L.unit_words() && src.size() == L.unit_words());
    sketch_merge_slice(dst, src, L, 0);
}

void sketch_merge_slice(std::span<word> dst, std::span<const word> src, const SketchLayout& L,
                        u64 lo) {
    assert(dst.size() == src.size());
    u64 hi = lo + dst.size();
    assert(hi <= L.unit_words());
    for (u64 w = lo; w < hi; ++w) {
        // tau words sit at offset 2 of each 3-word cell past the counters
        bool tau = w >= L.counter_words && (w - L.counter_words) % kBucketWords == 2;
        if (tau)
            dst[w - lo] = m61::add(dst[w - lo], src[w - lo]);
        else
            dst[w - lo] = u64(i64(dst[w - lo]) + i64(src[w - lo]));
    }
}

bool sketch_is_zero(std::span<const word> record, const SketchLayout& L, u32 section_idx) {
    u64 off = L.section_off(section_idx);
    u64 end = off + L.sections[section_idx].params.bank_words();
    for (u64 w = off; w < end; ++w)
        if (record[w] != 0) return false;
    return true;
}

i64 sketch_counter(std::span<const word> record, const SketchLayout& L, u32 idx) {
    assert(idx < L.counter_words);
    return i64(record[idx]);
}

SampleResult sketch_sample(std::span<const word> record, const SketchLayout& L, u32 section_idx) {
    const Section& s = L.sections[section_idx];
    u64 off = L.section_off(section_idx);
    u32 C = s.params.copies, Lv = s.params.levels;
    bool any_nonzero = false;

    SampleResult res;
    for (u32 c = 0; c < C; ++c) {
        for (u32 l = 0; l < Lv; ++l) {
            const word* cell = &record[off + (u64(c) * Lv + l) * kBucketWords];
            if (cell[0] == 0 && cell[1] == 0 && cell[2] == 0) continue;
            any_nonzero = true;
            i64 gamma = i64(cell[0]);
            if (gamma != 1 && gamma != -1) continue;
            i64 coord_signed = gamma * i64(cell[1]);
            if (coord_signed < 0 || u64(coord_signed) >= L.code_space) continue;
            u64 coord = u64(coord_signed);
            if (sampler_depth(s.params, c, coord) < l) continue;
            if (s.gate == GateKind::min_depth &&
                subsample_depth(L.subsample_seed, coord) < s.gate_arg)
                continue;
            u64 fp = m61::pow(fingerprint_base(s.params, c), coord);
            u64 expect = gamma > 0 ? fp : m61::sub(0, fp);
            if (cell[2] != expect) continue;

            if (L.kind == CodeKind::edge_pair) {
                EdgeKey e = edge_decode(coord, L.V);
                if (!(e.u < e.v && e.v < L.V)) continue;
                res.edge = e;
            } else {
                u32 S = pair_slots(L.r);
                u64 slot = coord % S, tc = coord / S;
                u32 a = 0, b = 0, acc = 0;
                bool found = false;
                for (a = 0; a + 1 < L.r && !found; ++a) {
                    u32 row = L.r - 1 - a;
                    if (slot < acc + row) {
                        b = a + 1 + u32(slot - acc);
                        found = true;
                        break;
                    }
                    acc += row;
                }
                if (!found) continue;
                u32 sz = tuple_decode(tc, L.V, L.r, res.members);
                if (sz == 0 || b >= sz) continue;
                res.edge = EdgeKey{res.members[a], res.members[b]};
            }
            res.status = SampleStatus::ok;
            res.coord = coord;
            res.coef = int(gamma);
            return res;
        }
    }
    res.status = any_nonzero ? SampleStatus::fail : SampleStatus::empty;
    return res;
}

u64 SketchLayout::fingerprint() const {
    u64 h = mix64(num_units, V, u64(kind));
    h = mix64(h, r, counter_words);
    h = mix64(h, code_space, subsample_seed);
    for (const Section& s : sections) {
        h = mix64(h, s.params.seed, (u64(s.params.copies) << 32) | s.params.levels);
        h = mix64(h, u64(s.gate), s.gate_arg);
    }
    return h;
}

std::vector<word> SketchLayout::serialize_header() const {
    std::vector<word> out;
    out.push_back(kHeaderMagic);
    out.push_back(num_units);
    out.push_back(V);
    out.push_back(u64(kind));
    out.push_back(r);
    out.push_back(counter_words);
    out.push_back(code_space);
    out.push_back(subsample_seed);
    out.push_back(m61::P); // recorded for format completeness
    out.push_back(sections.size());
    for (const Section& s : sections) {
        out.push_back(s.params.seed);
        out.push_back(s.params.copies);
        out.push_back(s.params.levels);
        out.push_back(u64(s.gate));
        out.push_back(s.gate_arg);
    }
    return out;
}

SketchLayout SketchLayout::deserialize_header(std::span<const word> in, u64* consumed) {
    if (in.size() < 10 || in[0] != kHeaderMagic) throw em_error("bad sketch header");
    SketchLayout L;
    L.num_units = in[1];
    L.V = in[2];
    L.kind = CodeKind(in[3]);
    L.r = u32(in[4]);
    L.counter_words = u32(in[5]);
    L.code_space = in[6];
    L.subsample_seed = in[7];
    if (in[8] != m61::P) throw em_error("bad sketch header: field prime mismatch");
    u64 n = in[9];
    u64 need = 10 + n * 5;
    if (in.size() < need) throw em_error("truncated sketch header");
    for (u64 i = 0; i < n; ++i) {
        const word* w = &in[10 + i * 5];
        Section s;
        s.params.seed = w[0];
        s.params.copies = u32(w[1]);
        s.params.levels = u32(w[2]);
        s.gate = GateKind(w[3]);
        s.gate_arg = u32(w[4]);
        L.sections.push_back(s);
    }
    if (consumed) *consumed = need;
    return L;
}

namespace {

Section plain_section(u64 seed, u64 V, u64 code_space, double c0) {
    Section s;
    s.params.seed = seed;
    s.params.copies = default_copies(V, c0);
    s.params.levels = levels_for_space(code_space);
    return s;
}

} // namespace

SketchLayout make_cc_layout(u64 num_units, u64 V, u64 seed, double c0) {
    SketchLayout L;
    L.num_units = num_units;
    L.V = V;
    L.code_space = V * V;
    L.subsample_seed = mix64(seed, kSeedTagGate);
    L.sections.push_back(plain_section(mix64(seed, kSeedTagBank), V, L.code_space, c0));
    return L;
}

SketchLayout make_kconn_layout(u64 V, u32 k, u64 seed, double c0) {
    SketchLayout L;
    L.num_units = V;
    L.V = V;
    L.code_space = V * V;
    L.subsample_seed = mix64(seed, kSeedTagGate);
    for (u32 j = 0; j < k; ++j)
        L.sections.push_back(plain_section(mix64(seed, kSeedTagBank, j), V, L.code_space, c0));
    return L;
}

SketchLayout make_skeleton_layout(u64 V, u32 k, u32 num_levels, u64 seed, double c0) {
    SketchLayout L;
    L.num_units = V;
    L.V = V;
    L.code_space = V * V;
    L.subsample_seed = mix64(seed, kSeedTagGate);
    for (u32 lvl = 0; lvl < num_levels; ++lvl) {
        for (u32 j = 0; j < k; ++j) {
            Section s = plain_section(mix64(mix64(seed, kSeedTagBank, lvl), j), V, L.code_space, c0);
            s.gate = GateKind::min_depth;
            s.gate_arg = lvl;
            L.sections.push_back(s);
        }
    }
    return L;
}

SketchLayout make_mst_layout(u64 V, u32 num_stacks, u64 seed, double c0) {
    SketchLayout L;
    L.num_units = V;
    L.V = V;
    L.code_space = V * V;
    L.subsample_seed = mix64(seed, kSeedTagGate);
    for (u32 i = 0; i < num_stacks; ++i) {
        Section s = plain_section(mix64(seed, kSeedTagBank, 0x300 + i), V, L.code_space, c0);
        s.gate = GateKind::min_stack;
        s.gate_arg = i;
        L.sections.push_back(s);
    }
    return L;
}

SketchLayout make_hyper_layout(u64 V, u32 r, u64 seed, double c0) {
    if (r < 2 || r > 8) throw em_error("hyperedge arity out of range");
    SketchLayout L;
    L.num_units = V;
    L.V = V;
    L.kind = CodeKind::hyper_tuple;
    L.r = r;
    double bits = double(r) * std::log2(double(V + 1)) + std::log2(double(pair_slots(r)));
    if (bits >= 60.0) throw em_error("hyper coordinate space too large");
    u64 space = pair_slots(r);
    for (u32 i = 0; i < r; ++i) space *= (V + 1);
    L.code_space = space;
    L.subsample_seed = mix64(seed, kSeedTagGate);
    L.sections.push_back(plain_section(mix64(seed, kSeedTagBank, 0x700), V, space, c0));
    return L;
}

SketchLayout make_bucket_layout(u64 V, u64 num_buckets, u32 samplers, u64 seed) {
    SketchLayout L;
    L.num_units = num_buckets;
    L.V = V;
    L.code_space = V * V;
    L.counter_words = 1;
    L.subsample_seed = mix64(seed, kSeedTagGate);
    for (u32 t = 0; t < samplers; ++t) {
        Section s;
        s.params.seed = mix64(seed, kSeedTagBank, 0xb00 + t);
        s.params.copies = 1;
        s.params.levels = levels_for_space(L.code_space);
        L.sections.push_back(s);
    }
    return L;
}

} // namespace emsk
