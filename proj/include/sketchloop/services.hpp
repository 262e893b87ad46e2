#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sketchloop/estimates.hpp"
#include "sketchloop/histogram.hpp"

namespace sketchloop {

// Key-range ownership for one dimension: node i owns [b_i, b_{i+1}) with
// b_0 = -inf and b_{n_nodes} = +inf implied, so a value equal to a boundary
// belongs to the range on its right. Values are immutable; re-sharding
// installs a replacement with a higher version.
struct PartitionMap {
  uint32_t dimension = 0;
  std::vector<double> boundaries;  // strictly increasing, n_nodes - 1 or fewer
  uint32_t n_nodes = 1;
  uint64_t version = 0;
  bool degenerate_warning = false;

  bool operator==(const PartitionMap&) const = default;
};

// Owning node for a value: the number of boundaries at or below it.
// Out-of-domain values clamp to the edge ranges.
uint32_t route(const PartitionMap& map, double value);

// Equi-depth partition of the histogram mass: boundary i sits at the
// quantile i/n_nodes, advanced to the next bucket edge when quantiles
// collide so boundaries stay strictly increasing. When the mass is too
// concentrated to place a boundary, the boundary is dropped (its range
// merges into the neighbor) and degenerate_warning is set.
PartitionMap compute_partition(const DimHistogram& hist, uint32_t n_nodes,
                               uint32_t dimension = 0, uint64_t version = 0);

// Version-0 map with equal-width ranges over [domain_min, domain_max); the
// placeholder routers start from before any telemetry has arrived.
PartitionMap uniform_partition(double domain_min, double domain_max,
                               uint32_t n_nodes, uint32_t dimension = 0);

// Fraction of histogram mass whose owning node differs between the two
// maps, evaluated at bucket granularity. Data movement itself is not
// simulated; this is the reported cost proxy for a re-shard.
double moved_mass(const PartitionMap& from, const PartitionMap& to,
                  const DimHistogram& hist);

// One boundary per line, preceded by a header line with version, dimension,
// node count, and the degenerate flag.
std::string export_partition_text(const PartitionMap& map);

// Per-node record counts per epoch. Imbalance divides the maximum node load
// by the mean over all nodes, idle ones included, so it is always >= 1
// (an all-idle epoch counts as balanced).
class LoadLedger {
 public:
  explicit LoadLedger(uint32_t n_nodes);

  void add(uint32_t node, uint64_t count = 1);
  void close_epoch();

  uint32_t n_nodes() const { return n_nodes_; }
  size_t epochs() const { return rows_.size(); }
  const std::vector<uint64_t>& epoch_counts(size_t epoch) const;
  double imbalance(size_t epoch) const;
  double last_imbalance() const;
  double time_averaged_imbalance() const;

 private:
  static double imbalance_of(const std::vector<uint64_t>& counts);

  uint32_t n_nodes_;
  std::vector<uint64_t> current_;
  std::vector<std::vector<uint64_t>> rows_;
};

// Exact-key cache fed by heavy-hitter telemetry. refresh() replaces the
// resident set with the top keys of the latest heavy-hitter list; keys that
// persist across refreshes keep their hit counters.
class HotKeyCache {
 public:
  explicit HotKeyCache(size_t capacity);

  bool lookup(uint64_t key);  // counts a hit or a miss
  void refresh(const std::vector<HeavyHitter>& hh);

  size_t capacity() const { return capacity_; }
  size_t size() const { return resident_.size(); }
  bool contains(uint64_t key) const { return resident_.count(key) != 0; }
  uint64_t key_hits(uint64_t key) const;
  uint64_t hits() const { return hits_; }
  uint64_t misses() const { return misses_; }
  double hit_rate() const;
  void reset_counters();  // starts a fresh measurement window
  std::vector<uint64_t> resident_keys() const;  // sorted

 private:
  size_t capacity_;
  std::unordered_map<uint64_t, uint64_t> resident_;  // key -> hits
  uint64_t hits_ = 0;
  uint64_t misses_ = 0;
};

struct ReshardConfig {
  uint32_t dimension = 0;
  uint32_t n_nodes = 1;
  uint32_t window = 5;           // W, in epochs
  double imbalance_theta = 1.3;  // trigger when the window mean exceeds this
  double score_mult = 5.0;       // trigger when score >= mult * trailing median
};

// Hysteresis-guarded re-sharding driven by global estimate sets. A new map
// is emitted when the whole-table change score spikes above score_mult
// times its trailing median, or when the mean routed imbalance over the
// last `window` epochs exceeds imbalance_theta; after an emission the
// service stays quiet for `window` epochs, so alternating shifts cannot
// make it thrash.
class ReshardService {
 public:
  ReshardService(ReshardConfig cfg, PartitionMap initial);

  // One call per closed epoch with the dynamic router's imbalance.
  void note_imbalance(double imbalance);

  // One call per sync round. The set must carry the partition dimension's
  // key histogram; the change score is read from the whole-table entry.
  std::optional<PartitionMap> reshard_step(const EstimateSet& global);

  const PartitionMap& current() const { return current_; }
  uint64_t reshards() const { return reshards_; }
  double last_score() const { return last_score_; }
  double last_trailing_median() const { return last_median_; }
  double last_moved_mass() const { return last_moved_mass_; }

 private:
  ReshardConfig cfg_;
  PartitionMap current_;
  std::deque<double> scores_;      // change-score history, newest last
  std::deque<double> imbalances_;  // last `window` epoch imbalances
  int64_t last_reshard_epoch_ = -1;
  uint64_t reshards_ = 0;
  double last_score_ = 0.0;
  double last_median_ = 0.0;
  double last_moved_mass_ = 0.0;
};

}  // namespace sketchloop
