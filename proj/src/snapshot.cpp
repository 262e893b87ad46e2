#include "sketchloop/snapshot.hpp"

#include <cstring>
#include <stdexcept>

#include "sketchloop/wire.hpp"

namespace sketchloop {

namespace {
constexpr char kMagic[4] = {'N', 'S', 'K', 'T'};
constexpr uint32_t kVersion = 1;
}  // namespace

std::vector<uint8_t> serialize_sketch(const MergedUnivSketch& sk,
                                      const std::vector<DimHistogram>& histograms) {
  const SketchGeometry& g = sk.geometry();
  ByteWriter w;
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  w.u32(g.depth);
  w.u32(g.width);
  w.u32(g.levels);
  w.u32(g.dimensions);
  w.u32(g.track_k);
  w.u64(g.seed);
  for (uint32_t l = 0; l < g.levels; ++l) {
    const CountSketchTable& t = sk.table(l);
    for (int64_t c : t.cells()) w.i64(c);
    w.u8(t.overflowed() ? 1 : 0);
  }
  for (uint32_t d = 0; d < g.dimensions; ++d) w.u64(sk.stream_length(d));
  for (uint32_t d = 0; d < g.dimensions; ++d) {
    for (uint32_t l = 0; l < g.levels; ++l) {
      auto entries = sk.canonical_entries(d, l);
      w.u32(static_cast<uint32_t>(entries.size()));
      for (const auto& e : entries) {
        w.u64(e.key);
        w.i64(e.estimate);
      }
    }
  }
  w.u32(static_cast<uint32_t>(histograms.size()));
  for (const auto& h : histograms) {
    w.f64(h.config().min);
    w.f64(h.config().max);
    w.u32(h.config().buckets);
    w.u8(static_cast<uint8_t>(h.config().scale));
    w.u64(h.clamp_low());
    w.u64(h.clamp_high());
    w.u64(h.total());
    for (uint64_t c : h.counts()) w.u64(c);
  }
  return w.take();
}

MergedUnivSketch deserialize_sketch(std::span<const uint8_t> bytes,
                                    std::vector<DimHistogram>& histograms_out) {
  ByteReader r(bytes);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not an NSKT snapshot (bad magic)");
  uint32_t version = r.u32();
  if (version != kVersion)
    throw std::runtime_error("unsupported NSKT version " + std::to_string(version));
  SketchGeometry g;
  g.depth = r.u32();
  g.width = r.u32();
  g.levels = r.u32();
  g.dimensions = r.u32();
  g.track_k = r.u32();
  g.seed = r.u64();
  g.validate();

  MergedUnivSketch sk(g);
  for (uint32_t l = 0; l < g.levels; ++l) {
    CountSketchTable& t = sk.table_mut(l);
    for (int64_t& c : t.mutable_cells()) c = r.i64();
    t.set_overflowed(r.u8() != 0);
  }
  for (uint32_t d = 0; d < g.dimensions; ++d) sk.set_stream_length(d, r.u64());
  std::vector<HeavyHitter> entries;
  for (uint32_t d = 0; d < g.dimensions; ++d) {
    for (uint32_t l = 0; l < g.levels; ++l) {
      uint32_t n = r.u32();
      if (n > g.track_k) throw std::runtime_error("tracker dump larger than k");
      entries.clear();
      for (uint32_t i = 0; i < n; ++i) {
        uint64_t key = r.u64();
        int64_t est = r.i64();
        entries.push_back({key, est});
      }
      sk.tracker_assign(d, l, entries);
    }
  }
  uint32_t nh = r.u32();
  histograms_out.clear();
  histograms_out.reserve(nh);
  for (uint32_t i = 0; i < nh; ++i) {
    HistogramConfig cfg;
    cfg.min = r.f64();
    cfg.max = r.f64();
    cfg.buckets = r.u32();
    cfg.scale = static_cast<HistScale>(r.u8());
    uint64_t lo = r.u64();
    uint64_t hi = r.u64();
    uint64_t total = r.u64();
    std::vector<uint64_t> counts(cfg.buckets);
    for (auto& c : counts) c = r.u64();
    DimHistogram h(cfg);
    h.restore(std::move(counts), total, lo, hi);
    histograms_out.push_back(std::move(h));
  }
  if (!r.done()) throw std::runtime_error("trailing bytes after NSKT snapshot");
  return sk;
}

std::vector<uint8_t> serialize_snapshot(const EpochSnapshot& snap) {
  ByteWriter w;
  w.u32(snap.switch_id);
  w.u64(snap.epoch);
  auto body = serialize_sketch(snap.sketch, snap.histograms);
  w.bytes(body.data(), body.size());
  return w.take();
}

EpochSnapshot deserialize_snapshot(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  uint32_t switch_id = r.u32();
  uint64_t epoch = r.u64();
  std::vector<DimHistogram> hists;
  MergedUnivSketch sk = deserialize_sketch(bytes.subspan(12), hists);
  (void)r;
  return EpochSnapshot{switch_id, epoch, std::move(sk), std::move(hists)};
}

}  // namespace sketchloop
