#include "sketchloop/services.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace sketchloop {

uint32_t route(const PartitionMap& map, double value) {
  auto it = std::upper_bound(map.boundaries.begin(), map.boundaries.end(), value);
  return static_cast<uint32_t>(it - map.boundaries.begin());
}

PartitionMap compute_partition(const DimHistogram& hist, uint32_t n_nodes,
                               uint32_t dimension, uint64_t version) {
  if (n_nodes < 1) throw std::invalid_argument("partition needs >= 1 node");
  if (hist.total() == 0)
    throw std::invalid_argument("cannot partition an empty histogram");

  PartitionMap map;
  map.dimension = dimension;
  map.n_nodes = n_nodes;
  map.version = version;

  const std::vector<uint64_t>& counts = hist.counts();
  const uint32_t buckets = hist.config().buckets;
  uint64_t cum = 0;  // mass strictly below bucket b
  uint32_t b = 0;
  uint32_t prev_edge = 0;  // bucket-edge index of the previous boundary
  for (uint32_t i = 1; i < n_nodes; ++i) {
    double target =
        static_cast<double>(i) / n_nodes * static_cast<double>(hist.total());
    while (b < buckets && static_cast<double>(cum + counts[b]) < target) {
      cum += counts[b];
      ++b;
    }
    // a boundary must sit strictly inside the domain and above its
    // predecessor; quantile collisions advance to the next bucket edge
    uint32_t edge = std::max(b, prev_edge + 1);
    if (edge != b) map.degenerate_warning = true;
    if (edge > buckets - 1) {  // no edge left: merge this range into the last
      map.degenerate_warning = true;
      continue;
    }
    map.boundaries.push_back(hist.lower_edge(edge));
    prev_edge = edge;
  }
  return map;
}

PartitionMap uniform_partition(double domain_min, double domain_max,
                               uint32_t n_nodes, uint32_t dimension) {
  if (n_nodes < 1) throw std::invalid_argument("partition needs >= 1 node");
  if (!(domain_min < domain_max))
    throw std::invalid_argument("partition needs a non-degenerate domain");
  PartitionMap map;
  map.dimension = dimension;
  map.n_nodes = n_nodes;
  for (uint32_t i = 1; i < n_nodes; ++i)
    map.boundaries.push_back(domain_min +
                             (domain_max - domain_min) * i / n_nodes);
  return map;
}

double moved_mass(const PartitionMap& from, const PartitionMap& to,
                  const DimHistogram& hist) {
  if (hist.total() == 0) return 0.0;
  uint64_t moved = 0;
  const std::vector<uint64_t>& counts = hist.counts();
  for (uint32_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    double v = hist.lower_edge(i);
    if (route(from, v) != route(to, v)) moved += counts[i];
  }
  return static_cast<double>(moved) / static_cast<double>(hist.total());
}

std::string export_partition_text(const PartitionMap& map) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "version=%llu dimension=%u nodes=%u degenerate=%d\n",
                static_cast<unsigned long long>(map.version), map.dimension,
                map.n_nodes, map.degenerate_warning ? 1 : 0);
  out += line;
  for (double b : map.boundaries) {
    std::snprintf(line, sizeof line, "%.17g\n", b);
    out += line;
  }
  return out;
}

LoadLedger::LoadLedger(uint32_t n_nodes) : n_nodes_(n_nodes) {
  if (n_nodes < 1) throw std::invalid_argument("ledger needs >= 1 node");
  current_.assign(n_nodes_, 0);
}

void LoadLedger::add(uint32_t node, uint64_t count) {
  if (node >= n_nodes_) throw std::out_of_range("node id outside the ledger");
  current_[node] += count;
}

void LoadLedger::close_epoch() {
  rows_.push_back(current_);
  std::fill(current_.begin(), current_.end(), 0);
}

const std::vector<uint64_t>& LoadLedger::epoch_counts(size_t epoch) const {
  return rows_.at(epoch);
}

double LoadLedger::imbalance_of(const std::vector<uint64_t>& counts) {
  uint64_t total = std::accumulate(counts.begin(), counts.end(), uint64_t{0});
  if (total == 0) return 1.0;  // an idle epoch is balanced
  uint64_t max = *std::max_element(counts.begin(), counts.end());
  double mean = static_cast<double>(total) / static_cast<double>(counts.size());
  return static_cast<double>(max) / mean;
}

double LoadLedger::imbalance(size_t epoch) const {
  return imbalance_of(rows_.at(epoch));
}

double LoadLedger::last_imbalance() const {
  if (rows_.empty()) throw std::logic_error("no closed epochs in the ledger");
  return imbalance_of(rows_.back());
}

double LoadLedger::time_averaged_imbalance() const {
  if (rows_.empty()) throw std::logic_error("no closed epochs in the ledger");
  double sum = 0;
  for (const auto& row : rows_) sum += imbalance_of(row);
  return sum / static_cast<double>(rows_.size());
}

HotKeyCache::HotKeyCache(size_t capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("cache capacity must be >= 1");
}

bool HotKeyCache::lookup(uint64_t key) {
  auto it = resident_.find(key);
  if (it == resident_.end()) {
    ++misses_;
    return false;
  }
  ++it->second;
  ++hits_;
  return true;
}

void HotKeyCache::refresh(const std::vector<HeavyHitter>& hh) {
  std::unordered_map<uint64_t, uint64_t> next;
  next.reserve(capacity_);
  for (const HeavyHitter& e : hh) {
    if (next.size() == capacity_) break;
    auto old = resident_.find(e.key);
    next.emplace(e.key, old == resident_.end() ? 0 : old->second);
  }
  resident_ = std::move(next);
}

uint64_t HotKeyCache::key_hits(uint64_t key) const {
  auto it = resident_.find(key);
  return it == resident_.end() ? 0 : it->second;
}

double HotKeyCache::hit_rate() const {
  uint64_t total = hits_ + misses_;
  return total == 0 ? 0.0 : static_cast<double>(hits_) / static_cast<double>(total);
}

void HotKeyCache::reset_counters() {
  hits_ = misses_ = 0;
  for (auto& [key, hits] : resident_) hits = 0;
}

std::vector<uint64_t> HotKeyCache::resident_keys() const {
  std::vector<uint64_t> keys;
  keys.reserve(resident_.size());
  for (const auto& [key, hits] : resident_) keys.push_back(key);
  std::sort(keys.begin(), keys.end());
  return keys;
}

ReshardService::ReshardService(ReshardConfig cfg, PartitionMap initial)
    : cfg_(cfg), current_(std::move(initial)) {
  if (cfg_.n_nodes < 1) throw std::invalid_argument("reshard needs >= 1 node");
  if (cfg_.window < 1) throw std::invalid_argument("hysteresis window must be >= 1");
  if (cfg_.imbalance_theta < 1.0)
    throw std::invalid_argument("imbalance threshold below 1 can never be stable");
  if (cfg_.score_mult <= 0) throw std::invalid_argument("score multiplier must be > 0");
}

void ReshardService::note_imbalance(double imbalance) {
  imbalances_.push_back(imbalance);
  while (imbalances_.size() > cfg_.window) imbalances_.pop_front();
}

std::optional<PartitionMap> ReshardService::reshard_step(const EstimateSet& global) {
  const EstimateEntry* hist_entry = global.find(cfg_.dimension, MetricKind::KeyHistogram);
  const EstimateEntry* score_entry = global.find(kTableDim, MetricKind::ChangeScore);

  bool have_score = score_entry != nullptr && score_entry->absent_reason.empty();
  double score = have_score ? score_entry->scalar : 0.0;

  // trailing median of the scores seen before this one
  double median = 0.0;
  bool have_median = scores_.size() >= 3;
  if (have_median) {
    std::vector<double> sorted(scores_.begin(), scores_.end());
    std::sort(sorted.begin(), sorted.end());
    size_t mid = sorted.size() / 2;
    median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  }
  if (have_score) {
    scores_.push_back(score);
    while (scores_.size() > cfg_.window) scores_.pop_front();
  }
  last_score_ = score;
  last_median_ = median;

  bool score_trigger = have_score && have_median && score > 0 &&
                       score >= cfg_.score_mult * median;
  bool imbalance_trigger = imbalances_.size() >= cfg_.window;
  if (imbalance_trigger) {
    double mean = std::accumulate(imbalances_.begin(), imbalances_.end(), 0.0) /
                  static_cast<double>(imbalances_.size());
    imbalance_trigger = mean > cfg_.imbalance_theta;
  }
  bool cooling = last_reshard_epoch_ >= 0 &&
                 static_cast<int64_t>(global.epoch) <
                     last_reshard_epoch_ + static_cast<int64_t>(cfg_.window);
  if (cooling || (!score_trigger && !imbalance_trigger)) return std::nullopt;
  if (hist_entry == nullptr || !hist_entry->histogram ||
      hist_entry->histogram->total() == 0)
    return std::nullopt;  // nothing to recompute from

  PartitionMap next = compute_partition(*hist_entry->histogram, cfg_.n_nodes,
                                        cfg_.dimension, current_.version + 1);
  last_moved_mass_ = moved_mass(current_, next, *hist_entry->histogram);
  current_ = std::move(next);
  ++reshards_;
  last_reshard_epoch_ = static_cast<int64_t>(global.epoch);
  return current_;
}

}  // namespace sketchloop
