#include "emsk/ingest.hpp"

#include <cstdio>
#include <vector>

namespace emsk {

namespace {

u64 update_hash(const TaggedUpdate& u) { return mix64(u.head, u.code); }

void zero_fill(BlockDevice& dev, ExtVec<word>& v) {
    ExtWriter<word> w(dev, v);
    for (u64 i = 0; i < v.size(); ++i) w.push(0);
    w.flush();
}

} // namespace

IngestState::IngestState(BlockDevice& dev, const SketchLayout& layout)
    : dev_(dev), layout_(layout), phi_(layout.unit_words()), units_(layout.num_units) {
    if (units_ == 0 || phi_ == 0) throw em_error("empty sketch layout");
    g_ = std::max<u64>(1, dev_.B() / phi_);
    ngroups_ = ceil_div(units_, g_);
    cap_recs_ = g_ * phi_;
    staging_cap_ = units_ * phi_;
    sketch_ = ext_alloc<word>(dev_, units_ * phi_);
    slots_ = ext_alloc<word>(dev_, ngroups_ * cap_recs_ * kTaggedWords);
    hdrs_ = ext_alloc<word>(dev_, ngroups_);
    staging_ = ext_alloc<TaggedUpdate>(dev_, staging_cap_);
    // allocations may recycle extents, so the array state must be written
    zero_fill(dev_, sketch_);
    zero_fill(dev_, hdrs_);
    writer_.emplace(dev_, staging_);
}

IngestState::~IngestState() {
    writer_.reset();
    ext_free(dev_, staging_);
    ext_free(dev_, hdrs_);
    ext_free(dev_, slots_);
    if (!finalized_) ext_free(dev_, sketch_);
}

void IngestState::feed_raw(const TaggedUpdate& u) {
    assert(!finalized_);
    if (u.target() >= units_) throw em_error("update target out of range");
    writer_->push(u);
    ++staged_;
    staged_sum_ += update_hash(u);
    staged_xor_ ^= update_hash(u);
    if (staged_ >= staging_cap_) flush_batch();
}

void IngestState::feed_edge(EdgeKey e, int delta, u32 wlevel) {
    if (!(e.u < e.v && e.v < layout_.V)) throw em_error("vertex id out of range");
    u64 code = edge_code(e.u, e.v, layout_.V);
    feed_raw(TaggedUpdate::make(e.u, 0, wlevel, delta, code));
    feed_raw(TaggedUpdate::make(e.v, 1, wlevel, delta, code));
}

void IngestState::feed_tuple(std::span<const u64> members, int delta) {
    if (layout_.kind != CodeKind::hyper_tuple) throw em_error("layout is not r-ary");
    if (members.size() < 2 || members.size() > layout_.r)
        throw em_error("tuple cardinality out of range");
    for (u64 i = 0; i < members.size(); ++i) {
        if (members[i] >= layout_.V) throw em_error("vertex id out of range");
        if (i > 0 && members[i - 1] >= members[i]) throw em_error("tuple not sorted");
    }
    u64 code = tuple_code(members, layout_.V, layout_.r);
    for (u32 p = 0; p < members.size(); ++p)
        feed_raw(TaggedUpdate::make(members[p], p, 0, delta, code));
}

void IngestState::apply_group(u64 grp, u64 first_rec, u64 count) {
    u64 vstart = grp * g_;
    u64 vcount = std::min(g_, units_ - vstart);
    u64 load_words = vcount * phi_;
    if (load_words > dev_.M() / 4) {
        assert(vcount == 1);
        apply_group_chunked(vstart, first_rec, count);
        return;
    }
    ExtVec<TaggedUpdate> run{
        ExtArray{slots_.arr.word_off + grp * cap_recs_ * kTaggedWords + first_rec * kTaggedWords,
                 kTaggedWords, count}};
    RamCharge charge(dev_, load_words);
    std::vector<word> buf(load_words);
    u64 base = sketch_.arr.word_off + vstart * phi_;
    dev_.read(base, buf);
    for (ExtReader<TaggedUpdate> r(dev_, run); !r.done();) {
        TaggedUpdate u = r.next();
        assert(u.target() >= vstart && u.target() < vstart + vcount);
        sketch_apply({buf.data() + (u.target() - vstart) * phi_, phi_}, layout_, u);
        applied_sum_ += update_hash(u);
        applied_xor_ ^= update_hash(u);
    }
    dev_.write(base, buf);
}

// phi past M/4: hold an update slice in RAM and stream the one sketch
// record past it in cell-aligned pieces
void IngestState::apply_group_chunked(u64 unit, u64 first_rec, u64 count) {
    assert(layout_.counter_words == 0);
    u64 slice_recs = std::max<u64>(1, dev_.M() / 16 / kTaggedWords);
    u64 piece_words = std::max<u64>(kBucketWords, dev_.M() / 8 / kBucketWords * kBucketWords);
    u64 base = sketch_.arr.word_off + unit * phi_;
    u64 slot_base = slots_.arr.word_off + (unit / g_) * cap_recs_ * kTaggedWords;
    for (u64 s = 0; s < count; s += slice_recs) {
        u64 n = std::min(slice_recs, count - s);
        RamCharge charge(dev_, n * kTaggedWords);
        std::vector<TaggedUpdate> ups(n);
        dev_.read(slot_base + (first_rec + s) * kTaggedWords,
                  {reinterpret_cast<word*>(ups.data()), n * kTaggedWords});
        for (const TaggedUpdate& u : ups) {
            assert(u.target() == unit);
            applied_sum_ += update_hash(u);
            applied_xor_ ^= update_hash(u);
        }
        RamCharge pcharge(dev_, piece_words);
        std::vector<word> piece(piece_words);
        for (u64 lo = 0; lo < phi_; lo += piece_words) {
            u64 len = std::min(piece_words, phi_ - lo);
            dev_.read(base + lo, {piece.data(), len});
            for (const TaggedUpdate& u : ups)
                sketch_apply_slice({piece.data(), len}, lo, layout_, u);
            dev_.write(base + lo, {piece.data(), len});
        }
    }
}

void IngestState::flush_batch() {
    assert(!finalized_);
    if (staged_ == 0) return;
    writer_->flush();
    writer_.reset();
    ++batches_;

    ExtVec<TaggedUpdate> batch{ExtArray{staging_.arr.word_off, kTaggedWords, staged_}};
    double direct_cost = 2.0 * double(staged_);
    double route_cost = sort_cost_blocks(staged_ * kTaggedWords, dev_.M(), dev_.B()) +
                        2.0 * scan_cost_blocks(staged_ * kTaggedWords, dev_.B());
    ExtVec<TaggedUpdate> sorted{};
    bool use_sort = route_cost < direct_cost;
    if (use_sort) {
        u64 gsz = g_;
        sorted = ext_sort_by(dev_, batch, [gsz](const TaggedUpdate& u) { return u.target() / gsz; });
    }

    {
        WordCache hdr(dev_);
        WordCache slot(dev_);
        ExtReader<TaggedUpdate> r(dev_, use_sort ? sorted : batch);
        while (!r.done()) {
            TaggedUpdate u = r.next();
            u64 grp = u.target() / g_;
            u64 fill = hdr.get(hdrs_.arr.word_off + grp);
            if (fill == cap_recs_) {
                slot.flush();
                apply_group(grp, 0, fill);
                ++overflows_;
                fill = 0;
            }
            u64 off = slots_.arr.word_off + (grp * cap_recs_ + fill) * kTaggedWords;
            slot.put(off, u.head);
            slot.put(off + 1, u.code);
            hdr.put(hdrs_.arr.word_off + grp, fill + 1);
        }
    }
    if (use_sort) ext_free(dev_, sorted);

    // one pass over hdrs, slots and sketches applies everything left
    {
        ExtReader<word> hr(dev_, hdrs_);
        for (u64 grp = 0; grp < ngroups_; ++grp) {
            u64 fill = hr.next();
            if (fill > 0) apply_group(grp, 0, fill);
        }
    }
    zero_fill(dev_, hdrs_);

    // every staged update was applied exactly once
    if (applied_sum_ != staged_sum_ || applied_xor_ != staged_xor_)
        throw em_error("batch application mismatch");
    staged_ = 0;
    staged_sum_ = staged_xor_ = applied_sum_ = applied_xor_ = 0;
    writer_.emplace(dev_, staging_);
}

SketchArray IngestState::finalize() {
    assert(!finalized_);
    flush_batch();
    finalized_ = true;
    return SketchArray{layout_, sketch_};
}

void save_sketch_array(const std::string& path, BlockDevice& dev, const SketchArray& arr) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw em_error("cannot open " + path + " for writing");
    std::vector<word> head = arr.layout.serialize_header();
    u64 hn = head.size();
    bool ok = std::fwrite(&hn, sizeof(u64), 1, f) == 1 &&
              std::fwrite(head.data(), sizeof(word), hn, f) == hn;
    std::vector<word> buf(dev.B());
    u64 total = arr.layout.total_words();
    for (u64 off = 0; ok && off < total; off += dev.B()) {
        u64 len = std::min(dev.B(), total - off);
        dev.read(arr.data.arr.word_off + off, {buf.data(), len});
        ok = std::fwrite(buf.data(), sizeof(word), len, f) == len;
    }
    bool closed = std::fclose(f) == 0;
    if (!ok || !closed) throw em_error("short write to " + path);
}

SketchArray load_sketch_array(const std::string& path, BlockDevice& dev) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw em_error("cannot open " + path);
    u64 hn = 0;
    if (std::fread(&hn, sizeof(u64), 1, f) != 1 || hn == 0 || hn > (u64(1) << 20)) {
        std::fclose(f);
        throw em_error("bad sketch file header");
    }
    std::vector<word> head(hn);
    if (std::fread(head.data(), sizeof(word), hn, f) != hn) {
        std::fclose(f);
        throw em_error("truncated sketch file");
    }
    SketchArray arr;
    try {
        u64 used = 0;
        arr.layout = SketchLayout::deserialize_header(head, &used);
        if (used != hn) throw em_error("bad sketch file header");
    } catch (...) {
        std::fclose(f);
        throw;
    }
    u64 total = arr.layout.total_words();
    arr.data = ext_alloc<word>(dev, total);
    std::vector<word> buf(dev.B());
    for (u64 off = 0; off < total; off += dev.B()) {
        u64 len = std::min(dev.B(), total - off);
        if (std::fread(buf.data(), sizeof(word), len, f) != len) {
            std::fclose(f);
            ext_free(dev, arr.data);
            throw em_error("truncated sketch file");
        }
        dev.write(arr.data.arr.word_off + off, {buf.data(), len});
    }
    std::fclose(f);
    return arr;
}

} // namespace emsk
