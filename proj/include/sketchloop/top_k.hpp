#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace sketchloop {

struct HeavyHitter {
  uint64_t key = 0;
  int64_t estimate = 0;
  bool operator==(const HeavyHitter&) const = default;
};

// Canonical order everywhere tracker contents are exposed: estimate
// descending, key ascending on ties.
inline void canonical_sort(std::vector<HeavyHitter>& v) {
  std::sort(v.begin(), v.end(), [](const HeavyHitter& a, const HeavyHitter& b) {
    if (a.estimate != b.estimate) return a.estimate > b.estimate;
    return a.key < b.key;
  });
}

// Keeps the k keys with the largest last-offered estimates. An offer for a
// tracked key refreshes its stored estimate in place; an offer for a new key
// evicts the current minimum only if it strictly beats it. Rejection is O(1)
// against a cached minimum, which matters because the data plane offers on
// every update.
class TopKTracker {
 public:
  TopKTracker() = default;
  explicit TopKTracker(uint32_t k) : k_(k) {
    if (k == 0) throw std::invalid_argument("tracker capacity must be >= 1");
    entries_.reserve(k);
  }

  uint32_t capacity() const { return k_; }
  size_t size() const { return entries_.size(); }

  void offer(uint64_t key, int64_t estimate) {
    auto it = index_.find(key);
    if (it != index_.end()) {
      entries_[it->second].estimate = estimate;
      if (it->second == min_idx_) rescan_min();
      else if (estimate < entries_[min_idx_].estimate) min_idx_ = it->second;
      return;
    }
    if (entries_.size() < k_) {
      entries_.push_back({key, estimate});
      index_.emplace(key, entries_.size() - 1);
      if (entries_.size() == 1 || estimate < entries_[min_idx_].estimate)
        min_idx_ = entries_.size() - 1;
      return;
    }
    if (estimate <= entries_[min_idx_].estimate) return;
    index_.erase(entries_[min_idx_].key);
    entries_[min_idx_] = {key, estimate};
    index_.emplace(key, min_idx_);
    rescan_min();
  }

  // Union with `other`, summing stored estimates for shared keys, then keep
  // the top k in canonical order.
  void merge(const TopKTracker& other) {
    if (other.k_ != k_)
      throw std::invalid_argument("cannot merge trackers with different capacity");
    std::unordered_map<uint64_t, int64_t> sums;
    sums.reserve(entries_.size() + other.entries_.size());
    for (const auto& e : entries_) sums[e.key] += e.estimate;
    for (const auto& e : other.entries_) sums[e.key] += e.estimate;
    std::vector<HeavyHitter> all;
    all.reserve(sums.size());
    for (const auto& [key, est] : sums) all.push_back({key, est});
    canonical_sort(all);
    if (all.size() > k_) all.resize(k_);
    assign(all);
  }

  // Contents in canonical order, with stored (last-offered) estimates.
  std::vector<HeavyHitter> dump() const {
    std::vector<HeavyHitter> out(entries_.begin(), entries_.end());
    canonical_sort(out);
    return out;
  }

  // Tracked keys, unordered.
  const std::vector<HeavyHitter>& raw() const { return entries_; }

  void assign(const std::vector<HeavyHitter>& entries) {
    if (entries.size() > k_)
      throw std::invalid_argument("tracker assignment exceeds capacity");
    entries_.assign(entries.begin(), entries.end());
    index_.clear();
    for (size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i].key, i);
    rescan_min();
  }

  void clear() {
    entries_.clear();
    index_.clear();
    min_idx_ = 0;
  }

 private:
  void rescan_min() {
    min_idx_ = 0;
    for (size_t i = 1; i < entries_.size(); ++i)
      if (entries_[i].estimate < entries_[min_idx_].estimate) min_idx_ = i;
  }

  uint32_t k_ = 1;
  std::vector<HeavyHitter> entries_;
  std::unordered_map<uint64_t, size_t> index_;
  size_t min_idx_ = 0;
};

}  // namespace sketchloop
