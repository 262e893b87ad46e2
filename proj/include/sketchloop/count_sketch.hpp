#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sketchloop/hash.hpp"

namespace sketchloop {

namespace detail {

inline int64_t saturating_add(int64_t a, int64_t b, bool* overflowed) {
  int64_t out;
  if (__builtin_add_overflow(a, b, &out)) {
    *overflowed = true;
    return b > 0 ? std::numeric_limits<int64_t>::max()
                 : std::numeric_limits<int64_t>::min();
  }
  return out;
}

// Median of a small scratch vector. Even count averages the two middle
// elements (truncating toward zero, via 128-bit intermediate).
inline int64_t median_i64(std::vector<int64_t>& v) {
  if (v.empty()) return 0;
  size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  if (v.size() & 1) return v[mid];
  int64_t hi = v[mid];
  std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
  return static_cast<int64_t>((static_cast<__int128>(v[mid - 1]) + hi) / 2);
}

inline double median_f64(std::vector<double>& v) {
  if (v.empty()) return 0.0;
  size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  if (v.size() & 1) return v[mid];
  double hi = v[mid];
  std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
  return 0.5 * (v[mid - 1] + hi);
}

}  // namespace detail

// One count-sketch table: depth rows of width signed 64-bit counters.
// Width is a power of two; a single keyed mix per (row, key) yields both the
// bucket (low bits) and the sign (bit 63). Counters saturate instead of
// wrapping and the table remembers that it ever saturated.
class CountSketchTable {
 public:
  struct Slot {
    uint32_t col;
    int64_t sign;  // +1 or -1
  };

  CountSketchTable() = default;

  CountSketchTable(uint32_t depth, uint32_t width, const SeedSchedule& seeds,
                   uint32_t level)
      : depth_(depth), width_(width), mask_(width - 1), level_(level) {
    if (width < 2 || (width & (width - 1)) != 0)
      throw std::invalid_argument("count sketch width must be a power of two >= 2");
    if (depth < 1) throw std::invalid_argument("count sketch depth must be >= 1");
    row_seeds_.resize(depth);
    for (uint32_t i = 0; i < depth; ++i) row_seeds_[i] = seeds.row_seed(level, i);
    cells_.assign(size_t{depth} * width, 0);
  }

  uint32_t depth() const { return depth_; }
  uint32_t width() const { return width_; }

  // One hash evaluation.
  Slot slot(uint32_t row, uint64_t key) const {
    ++hash_evals_;
    uint64_t h = mix64(key, row_seeds_[row]);
    return Slot{static_cast<uint32_t>(h & mask_),
                (h >> 63) ? int64_t{1} : int64_t{-1}};
  }

  // Hash-free once the slot is known (the sampled update path reuses slots).
  void apply(uint32_t row, Slot s, int64_t weight) {
    int64_t& cell = cells_[size_t{row} * width_ + s.col];
    cell = detail::saturating_add(cell, s.sign * weight, &overflowed_);
    ++counter_updates_;
  }

  int64_t read(uint32_t row, Slot s) const {
    int64_t cell = cells_[size_t{row} * width_ + s.col];
    if (s.sign >= 0) return cell;
    // Saturated cells stay saturated under sign flip.
    if (cell == std::numeric_limits<int64_t>::min())
      return std::numeric_limits<int64_t>::max();
    return -cell;
  }

  void update(uint64_t key, int64_t weight) {
    for (uint32_t i = 0; i < depth_; ++i) apply(i, slot(i, key), weight);
  }

  // Median over all rows of the signed counter for key.
  int64_t estimate(uint64_t key) const {
    std::vector<int64_t> reads(depth_);
    for (uint32_t i = 0; i < depth_; ++i) reads[i] = read(i, slot(i, key));
    return detail::median_i64(reads);
  }

  // Median over rows of the row L2 norm sqrt(sum of squared counters).
  double l2() const {
    std::vector<double> norms(depth_);
    for (uint32_t i = 0; i < depth_; ++i) {
      unsigned __int128 acc = 0;
      const int64_t* row = &cells_[size_t{i} * width_];
      for (uint32_t c = 0; c < width_; ++c) {
        __int128 v = row[c];
        acc += static_cast<unsigned __int128>(v * v);
      }
      norms[i] = std::sqrt(static_cast<double>(acc));
    }
    return detail::median_f64(norms);
  }

  // Counter-wise sum; saturates like update does.
  void merge(const CountSketchTable& other) {
    if (other.depth_ != depth_ || other.width_ != width_ ||
        other.row_seeds_ != row_seeds_)
      throw std::invalid_argument("cannot merge count sketch tables with different shape or seeds");
    for (size_t i = 0; i < cells_.size(); ++i)
      cells_[i] = detail::saturating_add(cells_[i], other.cells_[i], &overflowed_);
    overflowed_ = overflowed_ || other.overflowed_;
  }

  // Median over rows of the row L2 norm of the counter-wise difference.
  static double diff_l2(const CountSketchTable& a, const CountSketchTable& b) {
    if (a.depth_ != b.depth_ || a.width_ != b.width_ || a.row_seeds_ != b.row_seeds_)
      throw std::invalid_argument("cannot diff count sketch tables with different shape or seeds");
    std::vector<double> norms(a.depth_);
    for (uint32_t i = 0; i < a.depth_; ++i) {
      unsigned __int128 acc = 0;
      const int64_t* ra = &a.cells_[size_t{i} * a.width_];
      const int64_t* rb = &b.cells_[size_t{i} * b.width_];
      for (uint32_t c = 0; c < a.width_; ++c) {
        __int128 d = static_cast<__int128>(ra[c]) - rb[c];
        acc += static_cast<unsigned __int128>(d * d);
      }
      norms[i] = std::sqrt(static_cast<double>(acc));
    }
    return detail::median_f64(norms);
  }

  bool overflowed() const { return overflowed_; }
  void clear() { std::fill(cells_.begin(), cells_.end(), 0); overflowed_ = false; }

  const std::vector<int64_t>& cells() const { return cells_; }
  std::vector<int64_t>& mutable_cells() { return cells_; }
  void set_overflowed(bool v) { overflowed_ = v; }

  uint64_t hash_evals() const { return hash_evals_; }
  uint64_t counter_updates() const { return counter_updates_; }
  void reset_stats() { hash_evals_ = 0; counter_updates_ = 0; }

  bool same_layout(const CountSketchTable& o) const {
    return depth_ == o.depth_ && width_ == o.width_ && row_seeds_ == o.row_seeds_;
  }
  bool operator==(const CountSketchTable& o) const {
    return same_layout(o) && cells_ == o.cells_ && overflowed_ == o.overflowed_;
  }

 private:
  uint32_t depth_ = 0;
  uint32_t width_ = 0;
  uint64_t mask_ = 0;
  uint32_t level_ = 0;
  std::vector<uint64_t> row_seeds_;
  std::vector<int64_t> cells_;
  bool overflowed_ = false;
  mutable uint64_t hash_evals_ = 0;
  uint64_t counter_updates_ = 0;
};

}  // namespace sketchloop
