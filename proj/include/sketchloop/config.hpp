#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sketchloop/geometry.hpp"
#include "sketchloop/northbound.hpp"
#include "sketchloop/services.hpp"
#include "sketchloop/workload.hpp"

namespace sketchloop {

// Configuration problems carry the offending line or field in the message;
// the CLI maps them to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct SubscriptionConfig {
  std::string name;                     // config key, e.g. "sub0"
  std::vector<std::string> attributes;  // dimension names ("dim0", ...)
  std::vector<MetricKind> metrics;
  Timing timing = Timing::Loose;
  uint32_t buffer = 64;
};

// Fully resolved experiment configuration. Every field has a default; the
// only section a config file must contain is [workload]. The resolved
// values are echoed into the run manifest.
struct RunConfig {
  // [topology]
  uint32_t switches = 4;
  uint32_t nodes_per_switch = 2;

  // [sketch]
  SketchGeometry geometry;  // dimensions and seed are filled during resolve
  double sampling_p = 1.0;

  // [workload]
  WorkloadSchedule schedule;     // seed is filled during resolve
  uint64_t records = 1'000'000;
  uint64_t epoch_records = 1000;  // per switch per epoch

  // [services]
  bool reshard_enabled = false;
  uint32_t reshard_dimension = 0;
  uint32_t reshard_window = 5;
  double imbalance_theta = 1.3;
  double score_mult = 5.0;
  bool cache_enabled = false;
  uint32_t cache_dimension = 0;
  uint32_t cache_capacity = 64;

  // [api]
  std::vector<SubscriptionConfig> subscriptions;

  // [run]
  uint64_t seed = 42;
  uint32_t sync_period = 10;
  double hh_threshold = 0.01;
  uint32_t histogram_buckets = 512;

  uint32_t nodes() const { return switches * nodes_per_switch; }
  uint64_t records_per_epoch() const { return epoch_records * switches; }
  uint64_t epochs() const { return records / records_per_epoch(); }

  // Derived seeds: one named sub-seed per consumer, all flowing from `seed`.
  uint64_t workload_seed() const;
  uint64_t sketch_seed() const;

  // Validates cross-field invariants and stamps derived fields (geometry
  // dimensions and seeds). Called by parse_config; call it again after
  // overriding `seed`.
  void resolve();

  std::vector<std::string> dimension_names() const;
  std::vector<HistogramConfig> histogram_configs() const;
};

// Parses INI-style text: [section] headers, key = value pairs, # or ;
// comments. Unknown sections or keys are errors (they are always typos).
// The [workload] section is required; everything else falls back to
// defaults. Dimension keys use the dimN.field form.
RunConfig parse_config(const std::string& text);

RunConfig load_config_file(const std::string& path);

}  // namespace sketchloop
