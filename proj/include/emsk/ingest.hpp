#pragma once

#include <optional>
#include <string>

#include "emsk/block_device.hpp"
#include "emsk/ext_algo.hpp"
#include "emsk/sketch.hpp"

namespace emsk {

// Handle to an on-device sketch array: num_units records of unit_words()
// words each, contiguous in unit order.
struct SketchArray {
    SketchLayout layout;
    ExtVec<word> data;
};

// Single-pass vertex-grouped ingestion. Updates are staged on the device,
// routed batch-wise into per-group buffers and flushed into the sketch
// array with one simultaneous scan per batch. Groups hold g = max(1,
// floor(B/phi)) consecutive units so a group load moves Theta(B) words
// when sketches are small.
class IngestState {
public:
    IngestState(BlockDevice& dev, const SketchLayout& layout);
    ~IngestState();

    IngestState(const IngestState&) = delete;
    IngestState& operator=(const IngestState&) = delete;

    void feed_edge(EdgeKey e, int delta, u32 wlevel = 0);
    void feed_tuple(std::span<const u64> members, int delta);
    // bucket pipelines build their own tagged updates
    void feed_raw(const TaggedUpdate& u);

    void flush_batch();
    SketchArray finalize();

    u64 group_size() const { return g_; }
    u64 staging_capacity() const { return staging_cap_; }
    u64 staged_records() const { return staged_; }
    u64 batches_flushed() const { return batches_; }
    u64 overflow_events() const { return overflows_; }

private:
    void apply_group(u64 grp, u64 first_rec, u64 count);
    void apply_group_chunked(u64 unit, u64 first_rec, u64 count);

    BlockDevice& dev_;
    SketchLayout layout_;
    u64 phi_, units_, g_, ngroups_, cap_recs_, staging_cap_;
    ExtVec<word> sketch_;
    ExtVec<word> slots_;
    ExtVec<word> hdrs_;
    ExtVec<TaggedUpdate> staging_;
    std::optional<ExtWriter<TaggedUpdate>> writer_;
    u64 staged_ = 0, batches_ = 0, overflows_ = 0;
    u64 staged_sum_ = 0, staged_xor_ = 0;
    u64 applied_sum_ = 0, applied_xor_ = 0;
    bool finalized_ = false;
};

// Sketch-array file: one header word count, the layout header, then the
// raw body words in unit order.
void save_sketch_array(const std::string& path, BlockDevice& dev, const SketchArray& arr);
SketchArray load_sketch_array(const std::string& path, BlockDevice& dev);

} // namespace emsk
