#pragma once

#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emsk/common.hpp"

namespace emsk {

// Machine model: M words of RAM, disk accessed in blocks of B words.
// Every primitive charges one I/O per block it touches.
struct EmParams {
    u64 ram_words = 0;   // M
    u64 block_words = 0; // B

    void validate() const {
        if (block_words < 2) throw em_error("block size must be at least 2 words");
        if (ram_words < 4 * block_words)
            throw em_error("RAM must hold at least four blocks (M >= 4B)");
    }
};

struct IoStats {
    u64 blocks_read = 0;
    u64 blocks_written = 0;

    u64 total() const { return blocks_read + blocks_written; }
    IoStats operator-(const IoStats& o) const {
        return {blocks_read - o.blocks_read, blocks_written - o.blocks_written};
    }
};

// Handle to a region of the device: `length` records of `record_words` words,
// packed contiguously starting at a block boundary. Records may straddle
// block boundaries; I/O is charged by touched blocks.
struct ExtArray {
    u64 word_off = 0;
    u64 record_words = 0;
    u64 length = 0;

    u64 words() const { return record_words * length; }
    u64 record_off(u64 i) const { return word_off + i * record_words; }
};

// Tracks words of RAM currently pledged to live buffers. The budget is
// asserted, not enforced: exceeding it is a bug in the caller.
class RamLedger {
public:
    explicit RamLedger(u64 capacity) : cap_(capacity) {}

    void acquire(u64 words) {
        live_ += words;
        assert(live_ <= cap_ && "RAM budget exceeded");
        if (live_ > high_) high_ = live_;
    }
    void release(u64 words) {
        assert(words <= live_);
        live_ -= words;
    }

    u64 live() const { return live_; }
    u64 high_water() const { return high_; }
    u64 capacity() const { return cap_; }

private:
    u64 live_ = 0;
    u64 high_ = 0;
    u64 cap_;
};

class BlockDevice {
public:
    explicit BlockDevice(EmParams params, std::optional<std::string> backing_file = std::nullopt);
    ~BlockDevice();

    BlockDevice(const BlockDevice&) = delete;
    BlockDevice& operator=(const BlockDevice&) = delete;

    const EmParams& params() const { return params_; }
    u64 B() const { return params_.block_words; }
    u64 M() const { return params_.ram_words; }

    ExtArray alloc(u64 record_words, u64 length);
    void free(const ExtArray& arr);

    // Word-granular access. Each call charges every block overlapping the
    // range; callers that want streaming costs must buffer (ExtReader/Writer).
    void read(u64 word_off, std::span<word> out);
    void write(u64 word_off, std::span<const word> in);

    void read_record(const ExtArray& arr, u64 i, std::span<word> out);
    void write_record(const ExtArray& arr, u64 i, std::span<const word> in);

    IoStats io_snapshot() const { return stats_; }
    void io_reset() { stats_ = IoStats{}; }

    RamLedger& ram() { return ram_; }

    u64 disk_high_water_blocks() const { return total_blocks_; }

private:
    u64 touched_blocks(u64 word_off, u64 n) const;
    void backing_read(u64 word_off, std::span<word> out);
    void backing_write(u64 word_off, std::span<const word> in);

    EmParams params_;
    IoStats stats_;
    RamLedger ram_;

    std::vector<word> mem_;
    std::FILE* file_ = nullptr;
    u64 file_words_ = 0; // words materialized in the backing file

    u64 total_blocks_ = 0;
    // free extents as (first block, block count), kept sorted and coalesced
    std::vector<std::pair<u64, u64>> free_list_;
};

// RAII pledge of RAM words against the device budget.
class RamCharge {
public:
    RamCharge() = default;
    RamCharge(BlockDevice& dev, u64 words) : dev_(&dev), words_(words) { dev.ram().acquire(words); }
    ~RamCharge() { reset(); }

    RamCharge(RamCharge&& o) noexcept : dev_(o.dev_), words_(o.words_) { o.dev_ = nullptr; }
    RamCharge& operator=(RamCharge&& o) noexcept {
        if (this != &o) {
            reset();
            dev_ = o.dev_;
            words_ = o.words_;
            o.dev_ = nullptr;
        }
        return *this;
    }
    RamCharge(const RamCharge&) = delete;
    RamCharge& operator=(const RamCharge&) = delete;

    void reset() {
        if (dev_) dev_->ram().release(words_);
        dev_ = nullptr;
    }

private:
    BlockDevice* dev_ = nullptr;
    u64 words_ = 0;
};

} // namespace emsk
