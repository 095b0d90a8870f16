#pragma once

#include "emsk/ext_union_find.hpp"
#include "emsk/ext_wide.hpp"
#include "emsk/ingest.hpp"

namespace emsk {

struct RoundInfo {
    u64 live_before = 0;
    u64 ok_samples = 0;
    u64 fails = 0;
    u64 retires = 0;
    u64 merges = 0;
    u64 self_merges = 0;
};

struct CcStats {
    u64 rounds = 0;
    bool hit_round_cap = false;
    u64 sample_fails = 0;
    u64 self_merges = 0;
    u64 retired = 0;
    std::vector<RoundInfo> log;
};

struct CcResult {
    ExtVec<u64> labels;     // unit id -> component representative (minimum id)
    ExtVec<EdgeKey> forest; // witness edges, one per performed merge
    u64 components = 0;
    CcStats stats;
};

// Contraction rounds over per-unit sketches. Each round samples section 0
// of every live component, resolves the sampled endpoints through a
// batched union-find, contracts along the merge graph and sums the
// sketches of merged components. Components whose section reads as all
// zero are dropped from the live set (an empty cut vector can never be a
// merge destination). Rounds are capped; if components remain past the
// cap, hit_round_cap is set and the partial labeling is returned as-is.
// Consumes the array.
CcResult boruvka_extract(BlockDevice& dev, SketchArray arr);

// Copy of the array keeping sections [first, first+count) only.
SketchArray slice_sections(BlockDevice& dev, const SketchArray& arr, u32 first, u32 count);

} // namespace emsk
