#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

#include "sketchloop/estimates.hpp"
#include "sketchloop/replay.hpp"
#include "sketchloop/services.hpp"
#include "sketchloop/trace.hpp"
#include "sketchloop/workload.hpp"

namespace sketchloop {

namespace {

using Counts = std::unordered_map<uint64_t, uint64_t>;

double entropy_of(const Counts& c, uint64_t m) {
  double h = 0;
  for (const auto& [key, f] : c) {
    double p = static_cast<double>(f) / static_cast<double>(m);
    h -= p * std::log2(p);
  }
  return h;
}

double l2_diff(const Counts& a, const Counts& b) {
  double sum = 0;
  for (const auto& [key, f] : a) {
    auto it = b.find(key);
    double d = static_cast<double>(f) -
               (it == b.end() ? 0.0 : static_cast<double>(it->second));
    sum += d * d;
  }
  for (const auto& [key, f] : b)
    if (a.find(key) == a.end()) sum += static_cast<double>(f) * f;
  return std::sqrt(sum);
}

// Order statistic matching the trace convention: value at index
// ceil(q * n) - 1 of the sorted sample.
double exact_quantile(std::vector<double>& v, double q) {
  std::sort(v.begin(), v.end());
  auto idx = static_cast<int64_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
  if (idx < 0) idx = 0;
  if (idx >= static_cast<int64_t>(v.size()))
    idx = static_cast<int64_t>(v.size()) - 1;
  return v[static_cast<size_t>(idx)];
}

}  // namespace

void run_oracle(const RunConfig& cfg, std::ostream& trace_out) {
  const uint32_t n_switches = cfg.switches;
  const uint32_t n_nodes = cfg.nodes();
  const uint32_t n_dims = static_cast<uint32_t>(cfg.schedule.dims.size());
  const uint64_t per_epoch = cfg.records_per_epoch();
  const uint64_t n_epochs = cfg.epochs();
  const uint64_t mask = configured_dim_mask(cfg);

  WorkloadGen gen(cfg.schedule, per_epoch, n_nodes);
  // [switch][dim] exact counts and raw values, current epoch only
  std::vector<std::vector<Counts>> counts(n_switches, std::vector<Counts>(n_dims));
  std::vector<std::vector<std::vector<double>>> values(
      n_switches, std::vector<std::vector<double>>(n_dims));
  std::vector<std::vector<Counts>> prev_counts(n_switches,
                                               std::vector<Counts>(n_dims));
  std::vector<Counts> prev_global(n_dims);
  bool have_prev = false, have_prev_global = false;
  LoadLedger ledger_source(n_nodes);

  // exact rows for one (scope, switch) from one epoch's counts; vals may be
  // null when the caller has no raw samples (never the case today)
  auto emit_exact = [&](TraceWriter& w, uint64_t epoch, std::string_view scope,
                        std::string_view sw, std::vector<Counts>& cnts,
                        std::vector<std::vector<double>>* vals,
                        std::vector<Counts>* prev, bool prev_valid) {
    for (uint32_t d = 0; d < n_dims; ++d) {
      if ((mask >> d & 1) == 0) continue;
      Counts& c = cnts[d];
      const std::string dim = std::to_string(d);
      uint64_t m = 0;
      for (const auto& [key, f] : c) m += f;
      if (m > 0) {
        w.row(epoch, scope, sw, dim, "entropy", entropy_of(c, m), 0);
        w.row(epoch, scope, sw, dim, "cardinality",
              static_cast<double>(c.size()), 0);
        std::vector<HeavyHitter> hh;
        double cut = cfg.hh_threshold * static_cast<double>(m);
        for (const auto& [key, f] : c)
          if (static_cast<double>(f) >= cut)
            hh.push_back({key, static_cast<int64_t>(f)});
        canonical_sort(hh);
        for (const HeavyHitter& h : hh)
          w.row(epoch, scope, sw, dim, "hh_" + std::to_string(h.key),
                static_cast<double>(h.estimate), 0);
        if (vals != nullptr && !(*vals)[d].empty())
          for (double q : kQuantilePoints)
            w.row(epoch, scope, sw, dim, quantile_metric_name(q),
                  exact_quantile((*vals)[d], q), 0);
      }
      // per-dimension exact turnover; the sketch-side analogue is the
      // whole-table score at dimension "_table", so the names never collide
      if (prev != nullptr && prev_valid)
        w.row(epoch, scope, sw, dim, "change_l2", l2_diff(c, (*prev)[d]), 0);
    }
  };

  TraceWriter w(trace_out);
  const uint64_t total = n_epochs * per_epoch;
  for (uint64_t i = 0; i < total; ++i) {
    const Record& rec = gen.next();
    uint32_t sw = rec.source_node / cfg.nodes_per_switch;
    for (uint32_t d = 0; d < n_dims; ++d) {
      if ((mask >> d & 1) == 0) continue;
      ++counts[sw][d][rec.values[d]];
      values[sw][d].push_back(static_cast<double>(rec.values[d]));
    }
    ledger_source.add(rec.source_node);
    if ((i + 1) % per_epoch != 0) continue;

    const uint64_t epoch = i / per_epoch;
    for (uint32_t s = 0; s < n_switches; ++s)
      emit_exact(w, epoch, "local", std::to_string(s), counts[s], &values[s],
                 &prev_counts[s], have_prev);

    ledger_source.close_epoch();
    for (uint32_t n = 0; n < n_nodes; ++n)
      w.row(epoch, "node", std::to_string(n), "-", "load_source",
            static_cast<double>(ledger_source.epoch_counts(epoch)[n]), 0);

    if (cfg.cache_enabled && (mask >> cfg.cache_dimension & 1) != 0) {
      // clairvoyant per-epoch ceiling: hit rate of a cache that held this
      // epoch's exact global top-capacity keys throughout the epoch
      Counts pooled;
      uint64_t m = 0;
      for (uint32_t s = 0; s < n_switches; ++s)
        for (const auto& [key, f] : counts[s][cfg.cache_dimension]) {
          pooled[key] += f;
          m += f;
        }
      std::vector<HeavyHitter> top;
      top.reserve(pooled.size());
      for (const auto& [key, f] : pooled)
        top.push_back({key, static_cast<int64_t>(f)});
      canonical_sort(top);
      if (top.size() > cfg.cache_capacity) top.resize(cfg.cache_capacity);
      uint64_t hit_mass = 0;
      for (const HeavyHitter& h : top) hit_mass += static_cast<uint64_t>(h.estimate);
      w.row(epoch, "global", "central", "-", "cache_hit_clairvoyant",
            m == 0 ? 0.0 : static_cast<double>(hit_mass) / static_cast<double>(m),
            0);
    }

    if ((epoch + 1) % cfg.sync_period == 0) {
      std::vector<Counts> global(n_dims);
      std::vector<std::vector<double>> global_vals(n_dims);
      for (uint32_t s = 0; s < n_switches; ++s)
        for (uint32_t d = 0; d < n_dims; ++d) {
          for (const auto& [key, f] : counts[s][d]) global[d][key] += f;
          global_vals[d].insert(global_vals[d].end(), values[s][d].begin(),
                                values[s][d].end());
        }
      emit_exact(w, epoch, "global", "central", global, &global_vals,
                 &prev_global, have_prev_global);
      prev_global = std::move(global);
      have_prev_global = true;
    }

    prev_counts = std::move(counts);
    have_prev = true;
    counts.assign(n_switches, std::vector<Counts>(n_dims));
    for (auto& per_switch : values)
      for (auto& v : per_switch) v.clear();
  }
}

}  // namespace sketchloop
