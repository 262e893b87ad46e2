#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sketchloop/count_sketch.hpp"
#include "sketchloop/gsum.hpp"
#include "sketchloop/hash.hpp"
#include "sketchloop/merged_sketch.hpp"
#include "sketchloop/sampling.hpp"
#include "sketchloop/top_k.hpp"

namespace sketchloop {

// Classical single-dimension universal sketch: its own L tables, trackers,
// and sampling stream. Kept deliberately plain and separate from
// MergedUnivSketch; with the same seed and dim index the two must produce
// bit-identical tables, which the tests lean on. Also the per-dimension
// building block for the separate-sketches benchmark arm.
class UnivSketch {
 public:
  UnivSketch(uint32_t depth, uint32_t width, uint32_t levels, uint32_t track_k,
             uint64_t seed, uint32_t dim_index = 0, double sampling_p = 1.0)
      : depth_(depth),
        levels_(levels),
        track_k_(track_k),
        dim_(dim_index),
        schedule_(seed, levels, depth),
        sampler_(depth, sampling_p, sub_seed(seed, "sampling")) {
    level_seeds_.resize(levels);
    for (uint32_t l = 0; l < levels; ++l) level_seeds_[l] = schedule_.level_seed(l);
    tables_.reserve(levels);
    for (uint32_t l = 0; l < levels; ++l) tables_.emplace_back(depth, width, schedule_, l);
    trackers_.assign(levels, TopKTracker(track_k));
  }

  void update(uint64_t key, int64_t weight = 1) {
    m_ += static_cast<uint64_t>(weight);
    uint64_t mask = sampler_.next_mask();
    int64_t scaled = sampler_.scale_weight(weight);
    if (mask == 0) return;
    uint64_t composite = composite_key(key, dim_);
    uint32_t reach = 1;
    for (uint32_t l = 1; l < levels_; ++l) {
      ++level_hash_evals_;
      if (!level_bit(composite, level_seeds_[l])) break;
      ++reach;
    }
    std::vector<int64_t> reads;
    for (uint32_t l = 0; l < reach; ++l) {
      reads.clear();
      for (uint32_t row = 0; row < depth_; ++row) {
        if (!(mask & (1ULL << row))) continue;
        auto slot = tables_[l].slot(row, composite);
        tables_[l].apply(row, slot, scaled);
        reads.push_back(tables_[l].read(row, slot));
      }
      trackers_[l].offer(key, detail::median_i64(reads));
    }
  }

  int64_t estimate(uint64_t key) const {
    return tables_[0].estimate(composite_key(key, dim_));
  }

  double gsum(const GsumKind& kind) const {
    kind.validate();
    if (m_ == 0) return 0.0;
    auto entries_at = [&](uint32_t level) {
      std::vector<std::pair<uint64_t, double>> out;
      for (const auto& e : canonical_entries(level))
        out.emplace_back(e.key, static_cast<double>(e.estimate));
      return out;
    };
    auto bit = [&](uint32_t level, uint64_t key) {
      ++level_hash_evals_;
      return level_bit(composite_key(key, dim_), level_seeds_[level]);
    };
    return gsum_recurse(levels_, kind, entries_at, bit);
  }

  double entropy_bits() const {
    if (m_ == 0) throw std::domain_error("entropy of an empty stream is undefined");
    return entropy_from_gsum(m_, gsum(GsumKind::entropy()));
  }

  std::vector<HeavyHitter> heavy_hitters(double threshold) const {
    std::vector<HeavyHitter> out;
    if (m_ == 0) return out;
    double cut = threshold * static_cast<double>(m_);
    for (const auto& e : canonical_entries(0))
      if (static_cast<double>(e.estimate) >= cut) out.push_back(e);
    return out;
  }

  std::vector<HeavyHitter> canonical_entries(uint32_t level) const {
    std::vector<HeavyHitter> out;
    for (const auto& e : trackers_[level].raw())
      out.push_back({e.key, tables_[level].estimate(composite_key(e.key, dim_))});
    canonical_sort(out);
    if (out.size() > track_k_) out.resize(track_k_);
    return out;
  }

  uint64_t stream_length() const { return m_; }
  const CountSketchTable& table(uint32_t level) const { return tables_.at(level); }
  const TopKTracker& tracker(uint32_t level) const { return trackers_.at(level); }

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

 private:
  uint32_t depth_;
  uint32_t levels_;
  uint32_t track_k_;
  uint32_t dim_;
  SeedSchedule schedule_;
  std::vector<uint64_t> level_seeds_;
  std::vector<CountSketchTable> tables_;
  std::vector<TopKTracker> trackers_;
  uint64_t m_ = 0;
  SamplingState sampler_;
  mutable uint64_t level_hash_evals_ = 0;
};

}  // namespace sketchloop
