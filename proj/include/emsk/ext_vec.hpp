#pragma once

#include <algorithm>
#include <cstring>
#include <type_traits>
#include <vector>

#include "emsk/block_device.hpp"

namespace emsk {

// Typed view of an ExtArray. T must be trivially copyable with a size that
// is a whole number of words; it is stored verbatim.
template <class T>
struct ExtVec {
    static_assert(std::is_trivially_copyable_v<T>);
    static_assert(sizeof(T) % kWordBytes == 0);
    static constexpr u64 rec_words = sizeof(T) / kWordBytes;

    ExtArray arr;

    u64 size() const { return arr.length; }
    bool empty() const { return arr.length == 0; }
};

template <class T>
ExtVec<T> ext_alloc(BlockDevice& dev, u64 length) {
    return ExtVec<T>{dev.alloc(ExtVec<T>::rec_words, length)};
}

template <class T>
void ext_free(BlockDevice& dev, ExtVec<T>& v) {
    dev.free(v.arr);
    v.arr = ExtArray{};
}

// Shrink in place and return whole tail blocks to the allocator, so a
// later ext_free of the shorter vec balances the books.
template <class T>
void ext_shrink(BlockDevice& dev, ExtVec<T>& v, u64 new_length) {
    assert(new_length <= v.arr.length);
    u64 old_blocks = std::max<u64>(1, ceil_div(v.arr.words(), dev.B()));
    v.arr.length = new_length;
    u64 new_blocks = std::max<u64>(1, ceil_div(v.arr.words(), dev.B()));
    if (new_blocks < old_blocks) {
        u64 first = v.arr.word_off / dev.B() + new_blocks;
        dev.free(ExtArray{first * dev.B(), 1, (old_blocks - new_blocks) * dev.B()});
    }
}

// Sequential record reader over [first, first+count) of an array.
// Buffers one block; charges one read per block crossed.
template <class T>
class ExtReader {
public:
    ExtReader(BlockDevice& dev, const ExtVec<T>& v)
        : ExtReader(dev, v, 0, v.size()) {}

    ExtReader(BlockDevice& dev, const ExtVec<T>& v, u64 first, u64 count)
        : dev_(dev), arr_(v.arr), next_(first), end_(first + count),
          buf_(dev.B()), charge_(dev, dev.B()) {
        assert(end_ <= v.size());
    }

    bool done() const { return next_ >= end_; }
    u64 remaining() const { return end_ - next_; }

    T next() {
        assert(!done());
        if (peeked_) {
            peeked_ = false;
            ++next_;
            return peek_val_;
        }
        T out;
        word* dst = reinterpret_cast<word*>(&out);
        u64 off = arr_.record_off(next_);
        for (u64 i = 0; i < ExtVec<T>::rec_words; ++i) dst[i] = fetch(off + i);
        ++next_;
        return out;
    }

    const T& peek() {
        assert(!done());
        if (!peeked_) {
            peek_val_ = next();
            --next_;
            peeked_ = true;
        }
        return peek_val_;
    }

    void advance() {
        assert(!done());
        if (peeked_) {
            peeked_ = false;
            ++next_;
        } else {
            (void)next();
        }
    }

private:
    word fetch(u64 word_off) {
        u64 blk = word_off / dev_.B();
        if (blk != cur_block_) {
            dev_.read(blk * dev_.B(), std::span<word>(buf_));
            cur_block_ = blk;
        }
        return buf_[word_off % dev_.B()];
    }

    BlockDevice& dev_;
    ExtArray arr_;
    u64 next_, end_;
    std::vector<word> buf_;
    u64 cur_block_ = ~u64(0);
    bool peeked_ = false;
    T peek_val_{};
    RamCharge charge_;
};

// Sequential writer appending records from position 0 of an array.
// Buffers one block; a partial final block still costs one write.
template <class T>
class ExtWriter {
public:
    ExtWriter(BlockDevice& dev, ExtVec<T>& v)
        : dev_(dev), arr_(v.arr), buf_(dev.B(), 0), charge_(dev, dev.B()) {
        assert(arr_.word_off % dev_.B() == 0);
    }

    ~ExtWriter() { flush(); }

    void push(const T& rec) {
        assert(count_ < arr_.length);
        const word* src = reinterpret_cast<const word*>(&rec);
        for (u64 i = 0; i < ExtVec<T>::rec_words; ++i) {
            buf_[fill_++] = src[i];
            if (fill_ == dev_.B()) {
                dev_.write(arr_.word_off + written_words_, std::span<const word>(buf_));
                written_words_ += dev_.B();
                fill_ = 0;
            }
        }
        ++count_;
    }

    void flush() {
        if (fill_ > 0) {
            dev_.write(arr_.word_off + written_words_,
                       std::span<const word>(buf_.data(), fill_));
            written_words_ += fill_;
            fill_ = 0;
        }
    }

    u64 count() const { return count_; }

private:
    BlockDevice& dev_;
    ExtArray arr_;
    std::vector<word> buf_;
    u64 fill_ = 0;
    u64 written_words_ = 0;
    u64 count_ = 0;
    RamCharge charge_;
};

// Word-granular read/write access with a one-block cache. Sequential or
// clustered offsets cost about one block touch per block of data.
class WordCache {
public:
    explicit WordCache(BlockDevice& dev) : dev_(dev), buf_(dev.B(), 0), charge_(dev, dev.B()) {}
    ~WordCache() { flush(); }

    WordCache(const WordCache&) = delete;
    WordCache& operator=(const WordCache&) = delete;

    word get(u64 off) {
        load(off / dev_.B());
        return buf_[off % dev_.B()];
    }
    void put(u64 off, word v) {
        load(off / dev_.B());
        buf_[off % dev_.B()] = v;
        dirty_ = true;
    }
    void flush() {
        if (dirty_) {
            dev_.write(blk_ * dev_.B(), std::span<const word>(buf_));
            dirty_ = false;
        }
    }

private:
    void load(u64 blk) {
        if (blk == blk_) return;
        flush();
        dev_.read(blk * dev_.B(), std::span<word>(buf_));
        blk_ = blk;
    }

    BlockDevice& dev_;
    std::vector<word> buf_;
    u64 blk_ = ~u64(0);
    bool dirty_ = false;
    RamCharge charge_;
};

// Random-access record writer with a one-block cache. Absorbs repeated
// writes into the same block; anything else is read-modify-write.
class RandomWriter {
public:
    RandomWriter(BlockDevice& dev, const ExtArray& arr)
        : dev_(dev), arr_(arr), buf_(dev.B(), 0), charge_(dev, dev.B()) {}

    ~RandomWriter() { flush(); }

    void write_record(u64 i, std::span<const word> rec) {
        assert(rec.size() == arr_.record_words);
        u64 off = arr_.record_off(i);
        for (u64 w = 0; w < rec.size(); ++w) put(off + w, rec[w]);
    }

    void flush() {
        if (dirty_) {
            dev_.write(cur_block_ * dev_.B(), std::span<const word>(buf_));
            dirty_ = false;
        }
    }

private:
    void put(u64 word_off, word v) {
        u64 blk = word_off / dev_.B();
        if (blk != cur_block_) {
            flush();
            dev_.read(blk * dev_.B(), std::span<word>(buf_));
            cur_block_ = blk;
        }
        buf_[word_off % dev_.B()] = v;
        dirty_ = true;
    }

    BlockDevice& dev_;
    ExtArray arr_;
    std::vector<word> buf_;
    u64 cur_block_ = ~u64(0);
    bool dirty_ = false;
    RamCharge charge_;
};

// Load a small ExtVec into RAM (charged against the ledger by the caller
// via the returned vector's extent; use only where the budget allows).
template <class T>
std::vector<T> ext_load_all(BlockDevice& dev, const ExtVec<T>& v) {
    std::vector<T> out;
    out.reserve(v.size());
    for (ExtReader<T> r(dev, v); !r.done();) out.push_back(r.next());
    return out;
}

template <class T>
ExtVec<T> ext_store_all(BlockDevice& dev, const std::vector<T>& data) {
    ExtVec<T> v = ext_alloc<T>(dev, data.size());
    ExtWriter<T> w(dev, v);
    for (const T& rec : data) w.push(rec);
    w.flush();
    return v;
}

} // namespace emsk
