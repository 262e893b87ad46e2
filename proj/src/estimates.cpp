#include "sketchloop/estimates.hpp"

#include <stdexcept>

namespace sketchloop {

const char* metric_name(MetricKind m) {
  switch (m) {
    case MetricKind::Entropy: return "entropy";
    case MetricKind::Cardinality: return "cardinality";
    case MetricKind::HeavyHitters: return "hh";
    case MetricKind::ChangeScore: return "change_l2";
    case MetricKind::Quantiles: return "quantiles";
    case MetricKind::KeyHistogram: return "key_histogram";
  }
  return "?";
}

std::optional<MetricKind> metric_from_name(const std::string& name) {
  if (name == "entropy") return MetricKind::Entropy;
  if (name == "cardinality") return MetricKind::Cardinality;
  if (name == "hh" || name == "heavy_hitters") return MetricKind::HeavyHitters;
  if (name == "change_l2" || name == "change_score") return MetricKind::ChangeScore;
  if (name == "quantiles") return MetricKind::Quantiles;
  if (name == "key_histogram") return MetricKind::KeyHistogram;
  return std::nullopt;
}

const char* scope_name(Scope s) {
  return s == Scope::Local ? "local" : "global";
}

const EstimateEntry* EstimateSet::find(uint32_t dimension, MetricKind metric) const {
  for (const auto& e : entries)
    if (e.dimension == dimension && e.metric == metric) return &e;
  return nullptr;
}

bool values_equal(const EstimateSet& a, const EstimateSet& b) {
  return a.scope == b.scope && a.epoch == b.epoch && a.sync_round == b.sync_round &&
         a.degraded == b.degraded && a.stale_members == b.stale_members &&
         a.entries == b.entries;
}

namespace {

void write_entry(ByteWriter& w, const EstimateEntry& e) {
  w.u32(e.dimension);
  w.u8(static_cast<uint8_t>(e.metric));
  w.str(e.absent_reason);
  switch (e.metric) {
    case MetricKind::Entropy:
    case MetricKind::Cardinality:
    case MetricKind::ChangeScore:
      w.f64(e.scalar);
      break;
    case MetricKind::HeavyHitters:
      w.u32(static_cast<uint32_t>(e.hh.size()));
      for (const auto& h : e.hh) {
        w.u64(h.key);
        w.i64(h.estimate);
      }
      break;
    case MetricKind::Quantiles:
      w.u32(static_cast<uint32_t>(e.quantiles.size()));
      for (const auto& [q, v] : e.quantiles) {
        w.f64(q);
        w.f64(v);
      }
      break;
    case MetricKind::KeyHistogram: {
      w.u8(e.histogram.has_value() ? 1 : 0);
      if (!e.histogram) break;
      const DimHistogram& h = *e.histogram;
      w.f64(h.config().min);
      w.f64(h.config().max);
      w.u32(h.config().buckets);
      w.u8(static_cast<uint8_t>(h.config().scale));
      w.u64(h.clamp_low());
      w.u64(h.clamp_high());
      w.u64(h.total());
      for (uint64_t c : h.counts()) w.u64(c);
      break;
    }
  }
}

EstimateEntry read_entry(ByteReader& r) {
  EstimateEntry e;
  e.dimension = r.u32();
  e.metric = static_cast<MetricKind>(r.u8());
  e.absent_reason = r.str();
  switch (e.metric) {
    case MetricKind::Entropy:
    case MetricKind::Cardinality:
    case MetricKind::ChangeScore:
      e.scalar = r.f64();
      break;
    case MetricKind::HeavyHitters: {
      uint32_t n = r.u32();
      e.hh.reserve(n);
      for (uint32_t i = 0; i < n; ++i) {
        uint64_t key = r.u64();
        int64_t est = r.i64();
        e.hh.push_back({key, est});
      }
      break;
    }
    case MetricKind::Quantiles: {
      uint32_t n = r.u32();
      e.quantiles.reserve(n);
      for (uint32_t i = 0; i < n; ++i) {
        double q = r.f64();
        double v = r.f64();
        e.quantiles.emplace_back(q, v);
      }
      break;
    }
    case MetricKind::KeyHistogram: {
      if (r.u8() == 0) break;
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
      e.histogram = std::move(h);
      break;
    }
    default:
      throw std::runtime_error("estimate entry with unknown metric kind");
  }
  return e;
}

}  // namespace

std::vector<uint8_t> serialize_estimates(const EstimateSet& s) {
  ByteWriter w;
  w.u8(static_cast<uint8_t>(s.scope));
  w.u32(s.source);
  w.u64(s.epoch);
  w.u64(s.produced_at);
  w.u64(s.sync_round);
  w.u8(s.degraded ? 1 : 0);
  w.u32(static_cast<uint32_t>(s.stale_members.size()));
  for (uint32_t m : s.stale_members) w.u32(m);
  w.u32(static_cast<uint32_t>(s.entries.size()));
  for (const auto& e : s.entries) write_entry(w, e);
  return w.take();
}

EstimateSet deserialize_estimates(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  EstimateSet s;
  s.scope = static_cast<Scope>(r.u8());
  s.source = r.u32();
  s.epoch = r.u64();
  s.produced_at = r.u64();
  s.sync_round = r.u64();
  s.degraded = r.u8() != 0;
  uint32_t nm = r.u32();
  s.stale_members.reserve(nm);
  for (uint32_t i = 0; i < nm; ++i) s.stale_members.push_back(r.u32());
  uint32_t ne = r.u32();
  s.entries.reserve(ne);
  for (uint32_t i = 0; i < ne; ++i) s.entries.push_back(read_entry(r));
  if (!r.done()) throw std::runtime_error("trailing bytes after estimate set");
  return s;
}

}  // namespace sketchloop
