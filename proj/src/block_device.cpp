#include "emsk/block_device.hpp"

#include <algorithm>
#include <cstring>

namespace emsk {

BlockDevice::BlockDevice(EmParams params, std::optional<std::string> backing_file)
    : params_(params), ram_(params.ram_words) {
    params_.validate();
    if (backing_file) {
        file_ = std::fopen(backing_file->c_str(), "wb+");
        if (!file_) throw em_error("cannot open backing file: " + *backing_file);
    }
}

BlockDevice::~BlockDevice() {
    if (file_) std::fclose(file_);
}

ExtArray BlockDevice::alloc(u64 record_words, u64 length) {
    if (record_words == 0) throw em_error("zero record width");
    u64 blocks = ceil_div(record_words * length, B());
    if (blocks == 0) blocks = 1; // keep zero-length arrays addressable

    // first fit over the free list
    for (size_t i = 0; i < free_list_.size(); ++i) {
        auto [start, count] = free_list_[i];
        if (count >= blocks) {
            if (count == blocks)
                free_list_.erase(free_list_.begin() + i);
            else
                free_list_[i] = {start + blocks, count - blocks};
            return ExtArray{start * B(), record_words, length};
        }
    }
    u64 start = total_blocks_;
    total_blocks_ += blocks;
    if (!file_) mem_.resize(total_blocks_ * B(), 0);
    return ExtArray{start * B(), record_words, length};
}

void BlockDevice::free(const ExtArray& arr) {
    u64 blocks = ceil_div(arr.words(), B());
    if (blocks == 0) blocks = 1;
    u64 start = arr.word_off / B();
    auto it = std::lower_bound(free_list_.begin(), free_list_.end(),
                               std::make_pair(start, u64(0)));
    it = free_list_.insert(it, {start, blocks});
    // coalesce with neighbours
    if (it + 1 != free_list_.end() && it->first + it->second == (it + 1)->first) {
        it->second += (it + 1)->second;
        free_list_.erase(it + 1);
    }
    if (it != free_list_.begin() && (it - 1)->first + (it - 1)->second == it->first) {
        (it - 1)->second += it->second;
        free_list_.erase(it);
    }
}

u64 BlockDevice::touched_blocks(u64 word_off, u64 n) const {
    if (n == 0) return 0;
    u64 first = word_off / B();
    u64 last = (word_off + n - 1) / B();
    return last - first + 1;
}

void BlockDevice::backing_read(u64 word_off, std::span<word> out) {
    if (file_) {
        u64 have = word_off < file_words_ ? std::min<u64>(out.size(), file_words_ - word_off) : 0;
        if (have > 0) {
            std::fseek(file_, static_cast<long>(word_off * kWordBytes), SEEK_SET);
            size_t got = std::fread(out.data(), kWordBytes, have, file_);
            if (got != have) throw em_error("backing file read failed");
        }
        std::memset(out.data() + have, 0, (out.size() - have) * kWordBytes);
    } else {
        if (word_off + out.size() > mem_.size()) mem_.resize(word_off + out.size(), 0);
        std::memcpy(out.data(), mem_.data() + word_off, out.size() * kWordBytes);
    }
}

void BlockDevice::backing_write(u64 word_off, std::span<const word> in) {
    if (file_) {
        if (word_off > file_words_) {
            // materialize the gap so fseek stays within the file
            std::fseek(file_, static_cast<long>(file_words_ * kWordBytes), SEEK_SET);
            std::vector<char> zeros((word_off - file_words_) * kWordBytes, 0);
            std::fwrite(zeros.data(), 1, zeros.size(), file_);
        }
        std::fseek(file_, static_cast<long>(word_off * kWordBytes), SEEK_SET);
        size_t put = std::fwrite(in.data(), kWordBytes, in.size(), file_);
        if (put != in.size()) throw em_error("backing file write failed");
        file_words_ = std::max(file_words_, word_off + in.size());
    } else {
        if (word_off + in.size() > mem_.size()) mem_.resize(word_off + in.size(), 0);
        std::memcpy(mem_.data() + word_off, in.data(), in.size() * kWordBytes);
    }
}

void BlockDevice::read(u64 word_off, std::span<word> out) {
    stats_.blocks_read += touched_blocks(word_off, out.size());
    if (!out.empty()) backing_read(word_off, out);
}

void BlockDevice::write(u64 word_off, std::span<const word> in) {
    stats_.blocks_written += touched_blocks(word_off, in.size());
    if (!in.empty()) backing_write(word_off, in);
}

void BlockDevice::read_record(const ExtArray& arr, u64 i, std::span<word> out) {
    assert(i < arr.length && out.size() == arr.record_words);
    read(arr.record_off(i), out);
}

void BlockDevice::write_record(const ExtArray& arr, u64 i, std::span<const word> in) {
    assert(i < arr.length && in.size() == arr.record_words);
    write(arr.record_off(i), in);
}

} // namespace emsk
