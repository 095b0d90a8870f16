#pragma once

#include "emsk/ext_algo.hpp"

namespace emsk {

// Sequential reader over records whose width is only known at run time.
// Buffers one block; peek_word does not advance, read/skip do.
class WideReader {
public:
    WideReader(BlockDevice& dev, const ExtVec<word>& v, u64 stride)
        : WideReader(dev, v, stride, 0, v.size() / stride) {}

    WideReader(BlockDevice& dev, const ExtVec<word>& v, u64 stride, u64 first, u64 end)
        : dev_(dev), base_(v.arr.word_off), stride_(stride), cur_(first), end_(end),
          buf_(dev.B()), charge_(dev, dev.B()) {
        assert(stride > 0 && v.size() % stride == 0 && end <= v.size() / stride);
    }

    bool done() const { return cur_ >= end_; }
    u64 index() const { return cur_; }

    u64 peek_word(u64 off) {
        assert(!done() && off < stride_);
        return fetch(base_ + cur_ * stride_ + off);
    }

    // fills out with the record prefix, then advances
    void read(std::span<word> out) {
        assert(!done() && out.size() <= stride_);
        u64 off = base_ + cur_ * stride_;
        for (u64 i = 0; i < out.size(); ++i) out[i] = fetch(off + i);
        ++cur_;
    }

    void skip() {
        assert(!done());
        ++cur_;
    }

private:
    word fetch(u64 off) {
        u64 blk = off / dev_.B();
        if (blk != blk_) {
            dev_.read(blk * dev_.B(), std::span<word>(buf_));
            blk_ = blk;
        }
        return buf_[off % dev_.B()];
    }

    BlockDevice& dev_;
    u64 base_, stride_, cur_, end_;
    std::vector<word> buf_;
    u64 blk_ = ~u64(0);
    RamCharge charge_;
};

// Appending word writer for wide records; one buffered block.
class WideWriter {
public:
    WideWriter(BlockDevice& dev, ExtVec<word>& v)
        : dev_(dev), base_(v.arr.word_off), cap_(v.size()), buf_(dev.B(), 0),
          charge_(dev, dev.B()) {
        assert(base_ % dev.B() == 0);
    }

    ~WideWriter() { flush(); }

    WideWriter(const WideWriter&) = delete;
    WideWriter& operator=(const WideWriter&) = delete;

    void put(word w) {
        assert(count_ < cap_);
        buf_[fill_++] = w;
        ++count_;
        if (fill_ == dev_.B()) {
            dev_.write(base_ + count_ - fill_, std::span<const word>(buf_));
            fill_ = 0;
        }
    }

    void push(std::span<const word> rec) {
        for (word w : rec) put(w);
    }

    void flush() {
        if (fill_ > 0) {
            dev_.write(base_ + count_ - fill_, std::span<const word>(buf_.data(), fill_));
            fill_ = 0;
        }
    }

    u64 words() const { return count_; }

private:
    BlockDevice& dev_;
    u64 base_, cap_;
    std::vector<word> buf_;
    u64 fill_ = 0;
    u64 count_ = 0;
    RamCharge charge_;
};

// Stable merge sort for arrays whose record width is only known at run
// time (sketch-bearing records). Sorts by the ascending u64 at key_off
// within each record. Frees the input, returns a new array.
ExtVec<word> wide_sort(BlockDevice& dev, ExtVec<word> data, u64 stride, u64 key_off);

} // namespace emsk
