#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sketchloop/histogram.hpp"
#include "sketchloop/sampling.hpp"

namespace sketchloop {

// One multidimensional telemetry record. `values` holds the quantized key
// per dimension: sketches hash it, histograms bucket it, so both always see
// the same grid. The generator reuses one Record buffer; callers that keep a
// record across next() calls must copy it.
struct Record {
  uint64_t entity_id = 0;
  uint64_t timestamp = 0;
  uint32_t source_node = 0;
  std::vector<uint64_t> values;
};

enum class DistKind : uint8_t { Zipf, Lognormal };
enum class DriftKind : uint8_t { None, Ramp, AbruptShift, Concentration };

// Per-dimension distribution plus its drift across epochs. Zipf draws ranks
// in [0, keys); lognormal draws exp(mu + sigma*z) quantized to the integer
// grid [0, 65536). Drift semantics:
//   Ramp          zipf: s += rate per epoch; lognormal: mu += rate per epoch
//   AbruptShift   zipf: ranks relabel by +delta (mod keys) from shift_epoch;
//                 lognormal: values shift by +delta from shift_epoch
//   Concentration zipf: s += rate per epoch; lognormal: sigma *= rate per
//                 epoch (rate < 1), so mass migrates onto few keys
struct DimSchedule {
  DistKind dist = DistKind::Zipf;
  uint32_t keys = 10000;
  double zipf_s = 1.1;
  double mu = 7.0;
  double sigma = 0.5;
  DriftKind drift = DriftKind::None;
  double rate = 0.0;
  uint64_t shift_epoch = 0;
  double shift_delta = 0.0;

  void validate() const;

  // Histogram domain matching the quantization grid of this dimension.
  HistogramConfig histogram_config(uint32_t buckets) const;
};

inline constexpr uint32_t kLognormalGrid = 1u << 16;

struct WorkloadSchedule {
  std::vector<DimSchedule> dims;
  uint64_t seed = 1;

  void validate() const;
};

// Deterministic record stream: epoch boundaries every `epoch_records`
// records, source nodes round-robin, timestamps equal to the record index
// (the simulated clock is record-count driven).
class WorkloadGen {
 public:
  WorkloadGen(const WorkloadSchedule& schedule, uint64_t epoch_records,
              uint32_t n_nodes);

  const Record& next();

  uint64_t emitted() const { return index_; }
  uint64_t epoch_records() const { return epoch_records_; }
  uint32_t dimensions() const { return static_cast<uint32_t>(dims_.size()); }

 private:
  struct DimState {
    DimSchedule sched;
    std::vector<double> cum;  // zipf CDF for the current epoch
    double cur_s = 0;
    double cur_mu = 0;
    double cur_sigma = 0;
    uint64_t relabel = 0;
    double value_shift = 0;
  };

  void enter_epoch(uint64_t epoch);
  void rebuild_zipf(DimState& ds) const;
  uint64_t draw(DimState& ds);

  std::vector<DimState> dims_;
  SplitMix64 rng_;
  uint64_t epoch_records_;
  uint32_t n_nodes_;
  uint64_t index_ = 0;
  uint64_t epoch_ = 0;
  Record record_;
};

}  // namespace sketchloop
