#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sketchloop {

// Minimal deterministic generator for the sampling and workload paths.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  uint64_t state() const { return state_; }

 private:
  uint64_t state_;
};

// Per-row geometric-skip sampling for sketch updates. Each row keeps a skip
// countdown; a row is selected for the current record when its countdown hits
// zero, at which point one geometric draw refills it. p = 1 short-circuits:
// every row selected, zero randomness consumed, so the exact and sampled code
// paths are literally the same path.
//
// Selected updates carry weight/p. That is exact when 1/p is integral
// (p = 1, 0.5, 0.1, ...); otherwise the scaled weight is stochastically
// rounded so the counter stays unbiased on integer cells.
class SamplingState {
 public:
  SamplingState() = default;

  SamplingState(uint32_t rows, double p, uint64_t seed)
      : rows_(rows), p_(p), rng_(seed) {
    if (rows < 1 || rows > 64)
      throw std::invalid_argument("sampling rows must be in [1, 64]");
    if (!(p > 0.0) || p > 1.0)
      throw std::invalid_argument("sampling probability must be in (0, 1]");
    inv_ = 1.0 / p;
    int_inv_ = static_cast<int64_t>(std::llround(inv_));
    integral_inv_ = std::abs(inv_ - static_cast<double>(int_inv_)) < 1e-9;
    if (p_ < 1.0) {
      skip_.assign(rows_, 0);
      for (uint32_t i = 0; i < rows_; ++i) skip_[i] = draw_skip();
    }
  }

  double probability() const { return p_; }
  bool exact() const { return p_ == 1.0; }

  // Bit i set means row i participates in the current record's update.
  uint64_t next_mask() {
    if (p_ == 1.0) return rows_ == 64 ? ~0ULL : (1ULL << rows_) - 1;
    uint64_t mask = 0;
    for (uint32_t i = 0; i < rows_; ++i) {
      if (skip_[i] == 0) {
        mask |= 1ULL << i;
        skip_[i] = draw_skip();
      } else {
        --skip_[i];
      }
    }
    return mask;
  }

  int64_t scale_weight(int64_t w) {
    if (p_ == 1.0) return w;
    if (integral_inv_) return w * int_inv_;
    double x = static_cast<double>(w) * inv_;
    double fl = std::floor(x);
    ++draws_;
    return static_cast<int64_t>(fl) + (rng_.next_unit() < (x - fl) ? 1 : 0);
  }

  uint64_t draws() const { return draws_; }
  void reset_stats() { draws_ = 0; }

 private:
  uint64_t draw_skip() {
    ++draws_;
    double u = 1.0 - rng_.next_unit();  // (0, 1]
    double g = std::floor(std::log(u) / std::log1p(-p_));
    if (g < 0) g = 0;
    if (g > 1e18) g = 1e18;
    return static_cast<uint64_t>(g);
  }

  uint32_t rows_ = 1;
  double p_ = 1.0;
  double inv_ = 1.0;
  int64_t int_inv_ = 1;
  bool integral_inv_ = true;
  SplitMix64 rng_{0};
  std::vector<uint64_t> skip_;
  uint64_t draws_ = 0;
};

}  // namespace sketchloop
