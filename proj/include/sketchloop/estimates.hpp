#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sketchloop/histogram.hpp"
#include "sketchloop/top_k.hpp"
#include "sketchloop/wire.hpp"

namespace sketchloop {

enum class Scope : uint8_t { Local = 0, Global = 1 };

enum class MetricKind : uint8_t {
  Entropy = 0,
  Cardinality = 1,
  HeavyHitters = 2,
  ChangeScore = 3,
  Quantiles = 4,
  KeyHistogram = 5,
};

// Sentinel dimension for whole-table metrics: the change score folds all
// dimensions into the shared level-0 table, so it is not attributable to one.
inline constexpr uint32_t kTableDim = 0xFFFFFFFFu;

// Sentinel source id for sets produced by the central controller.
inline constexpr uint32_t kCentralSource = 0xFFFFFFFFu;

// Quantiles evaluated for every Quantiles entry; oracle and acceptance use
// the same set.
inline constexpr std::array<double, 5> kQuantilePoints = {0.25, 0.5, 0.75,
                                                          0.9, 0.99};

const char* metric_name(MetricKind m);
std::optional<MetricKind> metric_from_name(const std::string& name);
const char* scope_name(Scope s);

// One (dimension, metric) cell of an EstimateSet. Exactly one of the value
// members is meaningful, selected by `metric`; `absent_reason`, when
// non-empty, marks the entry absent-with-reason and the value members are
// ignored.
struct EstimateEntry {
  uint32_t dimension = 0;
  MetricKind metric = MetricKind::Entropy;
  std::string absent_reason;

  double scalar = 0.0;                              // Entropy | Cardinality | ChangeScore
  std::vector<HeavyHitter> hh;                      // HeavyHitters
  std::vector<std::pair<double, double>> quantiles; // Quantiles: (q, value)
  std::optional<DimHistogram> histogram;            // KeyHistogram

  bool operator==(const EstimateEntry&) const = default;
};

struct EstimateSet {
  Scope scope = Scope::Local;
  uint32_t source = 0;       // switch id, or kCentralSource
  uint64_t epoch = 0;        // last closed epoch the data covers
  uint64_t produced_at = 0;  // simulated time of computation
  uint64_t sync_round = 0;   // 0 for local sets
  bool degraded = false;
  std::vector<uint32_t> stale_members;
  std::vector<EstimateEntry> entries;

  bool operator==(const EstimateSet&) const = default;

  // Entry lookup; returns nullptr when the (dimension, metric) pair is not
  // present at all (distinct from present but absent-with-reason).
  const EstimateEntry* find(uint32_t dimension, MetricKind metric) const;
};

// Value identity for the hierarchy-consistency check: same data, ignoring
// when and where the set was received.
bool values_equal(const EstimateSet& a, const EstimateSet& b);

std::vector<uint8_t> serialize_estimates(const EstimateSet& s);
EstimateSet deserialize_estimates(std::span<const uint8_t> bytes);

}  // namespace sketchloop
