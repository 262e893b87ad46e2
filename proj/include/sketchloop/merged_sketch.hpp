#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "sketchloop/count_sketch.hpp"
#include "sketchloop/geometry.hpp"
#include "sketchloop/gsum.hpp"
#include "sketchloop/hash.hpp"
#include "sketchloop/sampling.hpp"
#include "sketchloop/top_k.hpp"

namespace sketchloop {

struct SketchStats {
  uint64_t level_hash_evals = 0;
  uint64_t row_hash_evals = 0;
  uint64_t counter_updates = 0;
  uint64_t sampling_draws = 0;

  uint64_t hash_evals() const { return level_hash_evals + row_hash_evals; }
};

// Universal sketch shared by D dimensions. All dimensions update the same
// L count-sketch tables; a dimension's keys are salted into a disjoint-enough
// composite space (key ^ dim_salt(dim)), so adding a dimension costs trackers
// and nothing else. Level j receives the composites whose membership bits
// g_1..g_j all came up 1; level 0 receives everything.
//
// Sampling (p < 1) picks rows per record, shared across every dimension and
// level of that record: one geometric draw per (record, row), and a record
// whose mask comes up empty skips hashing entirely. Selected updates carry
// weight/p.
class MergedUnivSketch {
 public:
  MergedUnivSketch() = default;

  // sampling_seed 0 derives the sampling stream from the geometry seed; any
  // other value re-seeds just the sampler (tables untouched), which is how
  // the bench isolates sampling variance.
  explicit MergedUnivSketch(const SketchGeometry& g, double sampling_p = 1.0,
                            uint64_t sampling_seed = 0)
      : geom_(g),
        schedule_(g.seed, g.levels, g.depth),
        sampler_(g.depth, sampling_p,
                 sampling_seed ? sampling_seed : sub_seed(g.seed, "sampling")),
        sampling_p_(sampling_p) {
    g.validate();
    level_seeds_.resize(g.levels);
    for (uint32_t l = 0; l < g.levels; ++l) level_seeds_[l] = schedule_.level_seed(l);
    tables_.reserve(g.levels);
    for (uint32_t l = 0; l < g.levels; ++l)
      tables_.emplace_back(g.depth, g.width, schedule_, l);
    trackers_.assign(size_t{g.dimensions} * g.levels, TopKTracker(g.track_k));
    m_.assign(g.dimensions, 0);
  }

  const SketchGeometry& geometry() const { return geom_; }
  double sampling_p() const { return sampling_p_; }

  // One record carrying a value for a single dimension.
  void update(uint32_t dim, uint64_t key, int64_t weight = 1) {
    check_dim(dim);
    uint64_t mask = sampler_.next_mask();
    int64_t scaled = sampler_.scale_weight(weight);
    apply_dim(dim, key, weight, mask, scaled);
  }

  // One record carrying values for all D dimensions; the row mask and scaled
  // weight are drawn once and shared, which is the whole point of merging the
  // compute. Bit i of present_mask clears to skip dimension i.
  void update_record(std::span<const uint64_t> keys, int64_t weight = 1,
                     uint64_t present_mask = ~0ULL) {
    if (keys.size() != geom_.dimensions)
      throw std::invalid_argument("update_record requires one key per dimension");
    uint64_t mask = sampler_.next_mask();
    int64_t scaled = sampler_.scale_weight(weight);
    for (uint32_t dim = 0; dim < geom_.dimensions; ++dim)
      if (present_mask & (1ULL << dim)) apply_dim(dim, keys[dim], weight, mask, scaled);
  }

  // Point frequency estimate from the level-0 table (all rows).
  int64_t estimate(uint32_t dim, uint64_t key) const {
    check_dim(dim);
    return tables_[0].estimate(composite_key(key, dim));
  }

  double gsum(uint32_t dim, const GsumKind& kind) const {
    check_dim(dim);
    kind.validate();
    if (m_[dim] == 0) return 0.0;
    auto entries_at = [&](uint32_t level) { return scored_entries(dim, level); };
    auto bit = [&](uint32_t level, uint64_t key) {
      ++level_hash_evals_;
      return level_bit(composite_key(key, dim), level_seeds_[level]);
    };
    return gsum_recurse(geom_.levels, kind, entries_at, bit);
  }

  double entropy_bits(uint32_t dim) const {
    check_dim(dim);
    if (m_[dim] == 0) throw std::domain_error("entropy of an empty dimension is undefined");
    return entropy_from_gsum(m_[dim], gsum(dim, GsumKind::entropy()));
  }

  // Keys whose level-0 estimate reaches threshold * stream length, canonical
  // order. Empty sketch yields an empty list.
  std::vector<HeavyHitter> heavy_hitters(uint32_t dim, double threshold) const {
    check_dim(dim);
    std::vector<HeavyHitter> out;
    if (m_[dim] == 0) return out;
    double cut = threshold * static_cast<double>(m_[dim]);
    for (const auto& e : canonical_entries(dim, 0)) {
      if (static_cast<double>(e.estimate) >= cut) out.push_back(e);
    }
    return out;
  }

  uint64_t stream_length(uint32_t dim) const {
    check_dim(dim);
    return m_[dim];
  }

  void merge(const MergedUnivSketch& other) {
    if (!(other.geom_ == geom_))
      throw std::invalid_argument("cannot merge sketches with different geometry or seed");
    for (uint32_t l = 0; l < geom_.levels; ++l) tables_[l].merge(other.tables_[l]);
    for (size_t i = 0; i < trackers_.size(); ++i) trackers_[i].merge(other.trackers_[i]);
    for (uint32_t d = 0; d < geom_.dimensions; ++d) m_[d] += other.m_[d];
  }

  // Change magnitude between two sketches of the same geometry: row-median L2
  // of the level-0 counter difference. Whole-table, not per-dimension; all
  // dimensions fold into the shared counters.
  static double diff_l2(const MergedUnivSketch& a, const MergedUnivSketch& b) {
    if (!(a.geom_ == b.geom_))
      throw std::invalid_argument("cannot diff sketches with different geometry or seed");
    return CountSketchTable::diff_l2(a.tables_[0], b.tables_[0]);
  }

  double table_l2(uint32_t level = 0) const { return tables_.at(level).l2(); }

  // Tracker contents re-estimated against the level table (full rows) and
  // canonically ordered. This is the view every query and serialization uses.
  std::vector<HeavyHitter> canonical_entries(uint32_t dim, uint32_t level) const {
    const TopKTracker& t = trackers_[size_t{dim} * geom_.levels + level];
    std::vector<HeavyHitter> out;
    out.reserve(t.size());
    for (const auto& e : t.raw())
      out.push_back({e.key, tables_[level].estimate(composite_key(e.key, dim))});
    canonical_sort(out);
    if (out.size() > geom_.track_k) out.resize(geom_.track_k);
    return out;
  }

  SketchStats stats() const {
    SketchStats s;
    s.level_hash_evals = level_hash_evals_;
    for (const auto& t : tables_) {
      s.row_hash_evals += t.hash_evals();
      s.counter_updates += t.counter_updates();
    }
    s.sampling_draws = sampler_.draws();
    return s;
  }

  void reset_stats() {
    level_hash_evals_ = 0;
    for (auto& t : tables_) t.reset_stats();
    sampler_.reset_stats();
  }

  bool overflowed() const {
    for (const auto& t : tables_)
      if (t.overflowed()) return true;
    return false;
  }

  // Serialization access.
  const CountSketchTable& table(uint32_t level) const { return tables_.at(level); }
  CountSketchTable& table_mut(uint32_t level) { return tables_.at(level); }
  const TopKTracker& tracker(uint32_t dim, uint32_t level) const {
    return trackers_.at(size_t{dim} * geom_.levels + level);
  }
  void tracker_assign(uint32_t dim, uint32_t level, const std::vector<HeavyHitter>& e) {
    trackers_.at(size_t{dim} * geom_.levels + level).assign(e);
  }
  void set_stream_length(uint32_t dim, uint64_t m) { m_.at(dim) = m; }

  bool state_equals(const MergedUnivSketch& o) const {
    if (!(geom_ == o.geom_) || m_ != o.m_ || tables_.size() != o.tables_.size())
      return false;
    for (size_t i = 0; i < tables_.size(); ++i)
      if (!(tables_[i] == o.tables_[i])) return false;
    for (size_t i = 0; i < trackers_.size(); ++i)
      if (trackers_[i].dump() != o.trackers_[i].dump()) return false;
    return true;
  }

 private:
  void check_dim(uint32_t dim) const {
    if (dim >= geom_.dimensions)
      throw std::invalid_argument("dimension index out of range");
  }

  void apply_dim(uint32_t dim, uint64_t key, int64_t weight, uint64_t mask,
                 int64_t scaled) {
    m_[dim] += static_cast<uint64_t>(weight);
    if (mask == 0) return;  // no sampled rows this record: no hash work at all
    uint64_t composite = composite_key(key, dim);
    uint32_t reach = 1;
    for (uint32_t l = 1; l < geom_.levels; ++l) {
      ++level_hash_evals_;
      if (!level_bit(composite, level_seeds_[l])) break;
      ++reach;
    }
    int64_t reads[64];
    for (uint32_t l = 0; l < reach; ++l) {
      CountSketchTable& t = tables_[l];
      uint32_t nr = 0;
      for (uint64_t bits = mask; bits; bits &= bits - 1) {
        uint32_t row = static_cast<uint32_t>(std::countr_zero(bits));
        auto slot = t.slot(row, composite);
        t.apply(row, slot, scaled);
        reads[nr++] = t.read(row, slot);
      }
      scratch_.assign(reads, reads + nr);
      trackers_[size_t{dim} * geom_.levels + l].offer(key, detail::median_i64(scratch_));
    }
  }

  // (key, estimate) pairs for the gsum recursion.
  std::vector<std::pair<uint64_t, double>> scored_entries(uint32_t dim,
                                                          uint32_t level) const {
    std::vector<std::pair<uint64_t, double>> out;
    for (const auto& e : canonical_entries(dim, level))
      out.emplace_back(e.key, static_cast<double>(e.estimate));
    return out;
  }

  SketchGeometry geom_;
  SeedSchedule schedule_;
  std::vector<uint64_t> level_seeds_;
  std::vector<CountSketchTable> tables_;
  std::vector<TopKTracker> trackers_;  // dim-major: [dim * levels + level]
  std::vector<uint64_t> m_;
  SamplingState sampler_;
  double sampling_p_ = 1.0;
  std::vector<int64_t> scratch_;
  mutable uint64_t level_hash_evals_ = 0;
};

}  // namespace sketchloop
