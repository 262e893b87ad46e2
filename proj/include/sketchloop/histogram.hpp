#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sketchloop {

enum class HistScale : uint8_t { Linear = 0, Log = 1 };

struct HistogramConfig {
  double min = 0.0;
  double max = 1.0;
  uint32_t buckets = 256;
  HistScale scale = HistScale::Linear;

  bool operator==(const HistogramConfig&) const = default;

  void validate() const {
    if (!(min < max)) throw std::invalid_argument("histogram requires min < max");
    if (buckets < 1) throw std::invalid_argument("histogram requires >= 1 bucket");
    if (scale == HistScale::Log && !(min > 0))
      throw std::invalid_argument("log-scaled histogram requires min > 0");
  }
};

// Fixed-bucket histogram over [min, max). Out-of-range values land in the
// edge buckets and are additionally counted as clamps, so merged histograms
// stay consistent and partitioning can tell when the domain was misjudged.
class DimHistogram {
 public:
  DimHistogram() { cfg_.validate(); counts_.assign(cfg_.buckets, 0); }

  explicit DimHistogram(const HistogramConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    counts_.assign(cfg_.buckets, 0);
  }

  const HistogramConfig& config() const { return cfg_; }

  uint32_t bucket_index(double v) const {
    double pos;
    if (cfg_.scale == HistScale::Linear) {
      pos = (v - cfg_.min) / (cfg_.max - cfg_.min);
    } else {
      if (!(v > 0)) return 0;  // nonpositive values clamp low on a log scale
      pos = (std::log(v) - std::log(cfg_.min)) /
            (std::log(cfg_.max) - std::log(cfg_.min));
    }
    if (pos < 0) return 0;
    auto idx = static_cast<int64_t>(pos * cfg_.buckets);
    if (idx >= cfg_.buckets) return cfg_.buckets - 1;
    return static_cast<uint32_t>(idx);
  }

  void add(double v, uint64_t weight = 1) {
    if (v < cfg_.min) ++clamp_low_;
    else if (v >= cfg_.max) ++clamp_high_;
    counts_[bucket_index(v)] += weight;
    total_ += weight;
  }

  double lower_edge(uint32_t i) const {
    double t = static_cast<double>(i) / cfg_.buckets;
    if (cfg_.scale == HistScale::Linear) return cfg_.min + (cfg_.max - cfg_.min) * t;
    return cfg_.min * std::pow(cfg_.max / cfg_.min, t);
  }

  double upper_edge(uint32_t i) const { return lower_edge(i + 1); }

  // Lower edge of the first bucket whose cumulative count reaches q * total.
  double quantile(double q) const {
    if (total_ == 0) throw std::runtime_error("quantile on empty histogram");
    if (q < 0 || q > 1) throw std::invalid_argument("quantile q must be in [0, 1]");
    double target = q * static_cast<double>(total_);
    uint64_t cum = 0;
    for (uint32_t i = 0; i < cfg_.buckets; ++i) {
      cum += counts_[i];
      if (static_cast<double>(cum) >= target) return lower_edge(i);
    }
    return lower_edge(cfg_.buckets - 1);
  }

  void merge(const DimHistogram& other) {
    if (!(other.cfg_ == cfg_))
      throw std::invalid_argument("cannot merge histograms with different configs");
    for (uint32_t i = 0; i < cfg_.buckets; ++i) counts_[i] += other.counts_[i];
    total_ += other.total_;
    clamp_low_ += other.clamp_low_;
    clamp_high_ += other.clamp_high_;
  }

  uint64_t total() const { return total_; }
  uint64_t clamp_low() const { return clamp_low_; }
  uint64_t clamp_high() const { return clamp_high_; }
  const std::vector<uint64_t>& counts() const { return counts_; }

  void clear() {
    std::fill(counts_.begin(), counts_.end(), 0);
    total_ = clamp_low_ = clamp_high_ = 0;
  }

  // For deserialization.
  void restore(std::vector<uint64_t> counts, uint64_t total, uint64_t lo, uint64_t hi) {
    if (counts.size() != cfg_.buckets)
      throw std::runtime_error("histogram restore: bucket count mismatch");
    counts_ = std::move(counts);
    total_ = total;
    clamp_low_ = lo;
    clamp_high_ = hi;
  }

  bool operator==(const DimHistogram&) const = default;

 private:
  HistogramConfig cfg_;
  std::vector<uint64_t> counts_;
  uint64_t total_ = 0;
  uint64_t clamp_low_ = 0;
  uint64_t clamp_high_ = 0;
};

}  // namespace sketchloop
