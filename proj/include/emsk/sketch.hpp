#pragma once

#include <span>
#include <vector>

#include "emsk/common.hpp"

namespace emsk {

// Coordinate codes. A graph edge {u, v} with u < v gets code u*V + v.
// A hyperedge is a sorted tuple encoded in base V+1 with V as the padding
// digit; its sketch coordinates are (tuple code, pair slot) pairs, so the
// coordinate space of an r-ary layout is (V+1)^r * r(r-1)/2.
struct EdgeKey {
    u64 u = 0, v = 0;
    bool operator==(const EdgeKey&) const = default;
};

inline u64 edge_code(u64 u, u64 v, u64 V) {
    assert(u < v && v < V);
    return u * V + v;
}

inline EdgeKey edge_decode(u64 code, u64 V) { return EdgeKey{code / V, code % V}; }

u64 tuple_code(std::span<const u64> members, u64 V, u32 r);
// returns member count, or 0 if the code is malformed
u32 tuple_decode(u64 code, u64 V, u32 r, std::vector<u64>& members);

inline u32 pair_slots(u32 r) { return r * (r - 1) / 2; }
inline u32 pair_slot(u32 a, u32 b, u32 r) {
    assert(a < b && b < r);
    return a * r - a * (a + 1) / 2 + (b - a - 1);
}

// One cell of an l0 sampler: signed count, signed index sum, and a
// fingerprint sum(coef * z^coord) in Z_p for p = 2^61 - 1.
struct OneSparseBucket {
    i64 gamma = 0;
    i64 sigma = 0;
    u64 tau = 0;
};
inline constexpr u64 kBucketWords = 3;

// Geometry of one sampler bank: `copies` independent samplers of `levels`
// nested subsampling levels each, all hashed from `seed`.
struct SketchParams {
    u64 seed = 0;
    u32 copies = 0;
    u32 levels = 0;

    u64 bank_words() const { return u64(copies) * levels * kBucketWords; }
};

enum class GateKind : u32 {
    always = 0,
    min_depth = 1,  // skeleton level i keeps codes with subsample depth >= i
    min_stack = 2,  // weight stack i keeps updates with weight rank <= i
};

struct Section {
    SketchParams params;
    GateKind gate = GateKind::always;
    u32 gate_arg = 0;
};

enum class CodeKind : u32 { edge_pair = 0, hyper_tuple = 1 };

// Full description of one family of per-unit sketch records. Every unit
// (vertex, double-cover vertex, or edge bucket) owns one record of
// unit_words() words: counter words first, then the section banks.
struct SketchLayout {
    u64 num_units = 0;   // how many records
    u64 V = 0;           // vertex id space for codes
    CodeKind kind = CodeKind::edge_pair;
    u32 r = 2;           // tuple arity for hyper_tuple
    u32 counter_words = 0;
    u64 code_space = 0;
    u64 subsample_seed = 0; // shared gate hash for min_depth sections
    std::vector<Section> sections;

    u64 unit_words() const {
        u64 w = counter_words;
        for (const Section& s : sections) w += s.params.bank_words();
        return w;
    }
    u64 section_off(u32 s) const {
        u64 w = counter_words;
        for (u32 i = 0; i < s; ++i) w += sections[i].params.bank_words();
        return w;
    }
    u64 total_words() const { return num_units * unit_words(); }
    u64 fingerprint() const; // structural hash for compatibility checks

    std::vector<word> serialize_header() const;
    static SketchLayout deserialize_header(std::span<const word> in, u64* consumed);
};

inline u32 levels_for_space(u64 code_space) { return ceil_log2(std::max<u64>(code_space, 2)) + 2; }
u32 default_copies(u64 V, double c0);

SketchLayout make_cc_layout(u64 num_units, u64 V, u64 seed, double c0 = 2.0);
SketchLayout make_kconn_layout(u64 V, u32 k, u64 seed, double c0 = 2.0);
SketchLayout make_skeleton_layout(u64 V, u32 k, u32 num_levels, u64 seed, double c0 = 2.0);
SketchLayout make_mst_layout(u64 V, u32 num_stacks, u64 seed, double c0 = 2.0);
SketchLayout make_hyper_layout(u64 V, u32 r, u64 seed, double c0 = 2.0);
SketchLayout make_bucket_layout(u64 V, u64 num_buckets, u32 samplers, u64 seed);

// Update wire format: two words. head packs the target unit id (40 bits),
// the endpoint position (8 bits), the weight rank (8 bits) and the delta
// sign (bit 56). code is the edge or tuple code.
struct TaggedUpdate {
    u64 head = 0;
    u64 code = 0;

    static TaggedUpdate make(u64 target, u32 pos, u32 wlevel, int delta, u64 code) {
        assert(target < (u64(1) << 40) && pos < 256 && wlevel < 256);
        TaggedUpdate t;
        t.head = target | (u64(pos) << 40) | (u64(wlevel) << 48) |
                 (delta < 0 ? (u64(1) << 56) : 0);
        t.code = code;
        return t;
    }
    u64 target() const { return head & ((u64(1) << 40) - 1); }
    u32 pos() const { return u32((head >> 40) & 0xff); }
    u32 wlevel() const { return u32((head >> 48) & 0xff); }
    int delta() const { return (head >> 56) & 1 ? -1 : 1; }
};
inline constexpr u64 kTaggedWords = sizeof(TaggedUpdate) / kWordBytes;

// hash family, shared by apply and sample
u32 sampler_depth(const SketchParams& p, u32 copy, u64 coord);
u64 fingerprint_base(const SketchParams& p, u32 copy);
u32 subsample_depth(u64 subsample_seed, u64 coord);

// Applies one tagged update to the bucket cells of a record slice. The
// slice is record words [lo, lo+slice.size()); boundaries must not split
// a 3-word bucket cell. lo == 0 also updates the counter words.
void sketch_apply_slice(std::span<word> slice, u64 lo, const SketchLayout& L,
                        const TaggedUpdate& u);

inline void sketch_apply(std::span<word> record, const SketchLayout& L, const TaggedUpdate& u) {
    sketch_apply_slice(record, 0, L, u);
}

// Convenience forms used by tests and by the in-memory reference path.
void vertex_update(std::span<word> record, const SketchLayout& L, EdgeKey e, int delta, u32 side,
                   u32 wlevel = 0);
void hyper_vertex_update(std::span<word> record, const SketchLayout& L,
                         std::span<const u64> members, u32 position, int delta);

void sketch_merge_into(std::span<word> dst, std::span<const word> src, const SketchLayout& L);
// adds record words [lo, lo+len) of src into dst, honoring the field
// layout; cell boundaries may fall anywhere
void sketch_merge_slice(std::span<word> dst, std::span<const word> src, const SketchLayout& L,
                        u64 lo);
bool sketch_is_zero(std::span<const word> record, const SketchLayout& L, u32 section_idx);

i64 sketch_counter(std::span<const word> record, const SketchLayout& L, u32 idx = 0);

enum class SampleStatus { ok, empty, fail };

struct SampleResult {
    SampleStatus status = SampleStatus::fail;
    u64 coord = 0;
    int coef = 0;
    EdgeKey edge;              // decoded pair; for hyper_tuple the crossing pair
    std::vector<u64> members;  // hyper_tuple decode
};

// Scans the section's buckets for a verified one-sparse cell and decodes
// it. Returns empty when every bucket of the section is zero.
SampleResult sketch_sample(std::span<const word> record, const SketchLayout& L, u32 section_idx);

// In-memory record array; the reference "apply directly" path used by
// tests and by pipelines whose state fits in RAM by construction.
struct RamSketchArray {
    SketchLayout layout;
    std::vector<word> data;

    explicit RamSketchArray(const SketchLayout& L)
        : layout(L), data(L.total_words(), 0) {}
    std::span<word> record(u64 unit) {
        return {data.data() + unit * layout.unit_words(), layout.unit_words()};
    }
    std::span<const word> record(u64 unit) const {
        return {data.data() + unit * layout.unit_words(), layout.unit_words()};
    }
    void apply(const TaggedUpdate& u) { sketch_apply(record(u.target()), layout, u); }
};

} // namespace emsk
