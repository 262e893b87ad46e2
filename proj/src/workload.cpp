#include "sketchloop/workload.hpp"

#include <algorithm>
#include <cmath>

namespace sketchloop {

void DimSchedule::validate() const {
  if (dist == DistKind::Zipf) {
    if (keys < 2) throw std::invalid_argument("zipf dimension needs >= 2 keys");
    if (!(zipf_s >= 0)) throw std::invalid_argument("zipf exponent must be >= 0");
  } else {
    if (!(sigma > 0)) throw std::invalid_argument("lognormal sigma must be > 0");
  }
  if (drift == DriftKind::Concentration && dist == DistKind::Lognormal &&
      !(rate > 0 && rate < 1))
    throw std::invalid_argument("lognormal concentration rate must be in (0, 1)");
}

HistogramConfig DimSchedule::histogram_config(uint32_t buckets) const {
  HistogramConfig cfg;
  cfg.min = 0;
  cfg.max = dist == DistKind::Zipf ? static_cast<double>(keys)
                                   : static_cast<double>(kLognormalGrid);
  cfg.buckets = buckets;
  cfg.scale = HistScale::Linear;
  return cfg;
}

void WorkloadSchedule::validate() const {
  if (dims.empty()) throw std::invalid_argument("workload needs >= 1 dimension");
  if (dims.size() > 64)
    throw std::invalid_argument("workload supports at most 64 dimensions");
  for (const auto& d : dims) d.validate();
}

WorkloadGen::WorkloadGen(const WorkloadSchedule& schedule, uint64_t epoch_records,
                         uint32_t n_nodes)
    : rng_(schedule.seed), epoch_records_(epoch_records), n_nodes_(n_nodes) {
  schedule.validate();
  if (epoch_records == 0) throw std::invalid_argument("epoch_records must be >= 1");
  if (n_nodes == 0) throw std::invalid_argument("n_nodes must be >= 1");
  dims_.reserve(schedule.dims.size());
  for (const auto& d : schedule.dims) {
    DimState ds;
    ds.sched = d;
    dims_.push_back(std::move(ds));
  }
  record_.values.resize(dims_.size());
  enter_epoch(0);
}

void WorkloadGen::enter_epoch(uint64_t epoch) {
  epoch_ = epoch;
  double e = static_cast<double>(epoch);
  for (auto& ds : dims_) {
    const DimSchedule& s = ds.sched;
    ds.cur_s = s.zipf_s;
    ds.cur_mu = s.mu;
    ds.cur_sigma = s.sigma;
    ds.relabel = 0;
    ds.value_shift = 0;
    switch (s.drift) {
      case DriftKind::None:
        break;
      case DriftKind::Ramp:
        if (s.dist == DistKind::Zipf) ds.cur_s = s.zipf_s + s.rate * e;
        else ds.cur_mu = s.mu + s.rate * e;
        break;
      case DriftKind::AbruptShift:
        if (epoch >= s.shift_epoch) {
          if (s.dist == DistKind::Zipf) {
            auto delta = static_cast<uint64_t>(std::llround(std::fabs(s.shift_delta)));
            ds.relabel = delta % s.keys;
          } else {
            ds.value_shift = s.shift_delta;
          }
        }
        break;
      case DriftKind::Concentration:
        if (s.dist == DistKind::Zipf) ds.cur_s = s.zipf_s + s.rate * e;
        else ds.cur_sigma = s.sigma * std::pow(s.rate, e);
        break;
    }
    if (ds.cur_s < 0) ds.cur_s = 0;
    if (s.dist == DistKind::Zipf) rebuild_zipf(ds);
  }
}

void WorkloadGen::rebuild_zipf(DimState& ds) const {
  ds.cum.resize(ds.sched.keys);
  double acc = 0;
  for (uint32_t r = 0; r < ds.sched.keys; ++r) {
    acc += std::pow(static_cast<double>(r + 1), -ds.cur_s);
    ds.cum[r] = acc;
  }
  for (auto& c : ds.cum) c /= acc;
}

uint64_t WorkloadGen::draw(DimState& ds) {
  if (ds.sched.dist == DistKind::Zipf) {
    double u = rng_.next_unit();
    auto it = std::lower_bound(ds.cum.begin(), ds.cum.end(), u);
    auto rank = static_cast<uint64_t>(it - ds.cum.begin());
    if (rank >= ds.sched.keys) rank = ds.sched.keys - 1;
    return (rank + ds.relabel) % ds.sched.keys;
  }
  // Box-Muller; one normal per draw keeps the RNG stream position a pure
  // function of (record index, dimension index).
  double u1 = rng_.next_unit();
  double u2 = rng_.next_unit();
  if (u1 <= 0) u1 = 0x1.0p-53;
  double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  double v = std::exp(ds.cur_mu + ds.cur_sigma * z) + ds.value_shift;
  if (v < 0) v = 0;
  auto q = static_cast<uint64_t>(v);
  if (q >= kLognormalGrid) q = kLognormalGrid - 1;
  return q;
}

const Record& WorkloadGen::next() {
  uint64_t epoch = index_ / epoch_records_;
  if (epoch != epoch_) enter_epoch(epoch);
  record_.entity_id = index_;
  record_.timestamp = index_;
  record_.source_node = static_cast<uint32_t>(index_ % n_nodes_);
  for (size_t d = 0; d < dims_.size(); ++d) record_.values[d] = draw(dims_[d]);
  ++index_;
  return record_;
}

}  // namespace sketchloop
