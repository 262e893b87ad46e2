#include "sketchloop/replay.hpp"

#include <optional>

#include "json.hpp"
#include "sketchloop/control_plane.hpp"
#include "sketchloop/dataplane.hpp"
#include "sketchloop/northbound.hpp"
#include "sketchloop/services.hpp"
#include "sketchloop/trace.hpp"

namespace sketchloop {

namespace {

// Shared emission for local and global estimate sets. Absent entries and
// dimensions outside the observation mask produce no rows; key histograms
// are carried by their quantile rows.
void emit_estimates(TraceWriter& w, const EstimateSet& set, uint64_t epoch,
                    std::string_view scope, std::string_view sw, uint64_t mask) {
  for (const EstimateEntry& e : set.entries) {
    if (!e.absent_reason.empty()) continue;
    if (e.dimension != kTableDim && (mask >> e.dimension & 1) == 0) continue;
    std::string dim = e.dimension == kTableDim ? std::string("_table")
                                               : std::to_string(e.dimension);
    switch (e.metric) {
      case MetricKind::Entropy:
        w.row(epoch, scope, sw, dim, "entropy", e.scalar, 0);
        break;
      case MetricKind::Cardinality:
        w.row(epoch, scope, sw, dim, "cardinality", e.scalar, 0);
        break;
      case MetricKind::HeavyHitters:
        for (const HeavyHitter& h : e.hh)
          w.row(epoch, scope, sw, dim, "hh_" + std::to_string(h.key),
                static_cast<double>(h.estimate), 0);
        break;
      case MetricKind::Quantiles:
        for (const auto& [q, v] : e.quantiles)
          w.row(epoch, scope, sw, dim, quantile_metric_name(q), v, 0);
        break;
      case MetricKind::ChangeScore:
        w.row(epoch, scope, sw, dim, "change_l2", e.scalar, 0);
        break;
      case MetricKind::KeyHistogram:
        break;
    }
  }
}

struct SubIds {
  std::vector<uint64_t> config_ids;  // parallel to cfg.subscriptions
  uint64_t reshard_id = 0;
  uint64_t cache_id = 0;
};

// Registers the config's subscriptions plus one internal subscription per
// enabled service, all through the public API path.
SubIds register_subscriptions(NorthboundApi& api, const RunConfig& cfg,
                              EstimateCallback noop) {
  auto names = cfg.dimension_names();
  auto cfgs = cfg.histogram_configs();
  auto attr = [&](uint32_t dim) {
    AttributeSpec a;
    a.name = names[dim];
    a.domain_min = cfgs[dim].min;
    a.domain_max = cfgs[dim].max;
    return a;
  };

  SubIds subs;
  for (const SubscriptionConfig& sc : cfg.subscriptions) {
    std::vector<AttributeSpec> attrs;
    for (const std::string& name : sc.attributes) {
      for (uint32_t d = 0; d < names.size(); ++d)
        if (names[d] == name) attrs.push_back(attr(d));
    }
    Subscription& sub = api.set_attributes(attrs, sc.metrics, sc.timing);
    api.get_estimates(sub.id, sc.buffer, noop);
    subs.config_ids.push_back(sub.id);
  }

  if (cfg.reshard_enabled) {
    Subscription& sub = api.set_attributes(
        {attr(cfg.reshard_dimension)},
        {MetricKind::KeyHistogram, MetricKind::ChangeScore}, Timing::Loose);
    api.get_estimates(sub.id, 4, noop);
    subs.reshard_id = sub.id;
  }
  if (cfg.cache_enabled) {
    Subscription& sub = api.set_attributes({attr(cfg.cache_dimension)},
                                           {MetricKind::HeavyHitters}, Timing::Loose);
    api.get_estimates(sub.id, 4, noop);
    subs.cache_id = sub.id;
  }
  return subs;
}

}  // namespace

uint64_t configured_dim_mask(const RunConfig& cfg) {
  uint64_t mask = 0;
  auto names = cfg.dimension_names();
  for (const SubscriptionConfig& sc : cfg.subscriptions)
    for (const std::string& a : sc.attributes)
      for (uint32_t d = 0; d < names.size(); ++d)
        if (names[d] == a) mask |= uint64_t{1} << d;
  if (cfg.reshard_enabled) mask |= uint64_t{1} << cfg.reshard_dimension;
  if (cfg.cache_enabled) mask |= uint64_t{1} << cfg.cache_dimension;
  if (mask == 0)  // nothing configured: observe everything
    mask = cfg.schedule.dims.size() >= 64
               ? ~uint64_t{0}
               : (uint64_t{1} << cfg.schedule.dims.size()) - 1;
  return mask;
}

void run_simulate(const RunConfig& cfg, std::ostream& trace_out) {
  const uint32_t n_switches = cfg.switches;
  const uint32_t n_nodes = cfg.nodes();
  const uint64_t per_epoch = cfg.records_per_epoch();
  const uint64_t n_epochs = cfg.epochs();
  const uint64_t mask = configured_dim_mask(cfg);
  const auto hist_cfgs = cfg.histogram_configs();

  WorkloadGen gen(cfg.schedule, per_epoch, n_nodes);
  std::vector<SwitchDataPlane> planes;
  std::vector<LocalController> locals;
  CentralController central(cfg.hh_threshold);
  for (uint32_t s = 0; s < n_switches; ++s) {
    // sampling_seed 0: derive from the shared sketch seed, so the p-sampling
    // decision for a key is identical on every switch (merge-consistent)
    planes.emplace_back(s, cfg.geometry, cfg.sampling_p, 0, hist_cfgs, per_epoch);
    planes.back().set_active_dims(mask);
    locals.emplace_back(s, cfg.hh_threshold);
    central.register_local(s);
  }

  NorthboundApi api(cfg.dimension_names());
  SubIds sub_ids = register_subscriptions(api, cfg, [](uint64_t, const Delivery&) {});

  // Both routers start from the same epoch-0 equi-depth map (computed after
  // the first epoch closes); the static one then freezes while reshard_step
  // keeps adapting the dynamic one. Until then both route uniformly.
  const uint32_t rdim = cfg.reshard_dimension;
  PartitionMap dyn_map, static_map;
  std::optional<ReshardService> reshard;
  LoadLedger ledger_source(n_nodes), ledger_dyn(n_nodes), ledger_static(n_nodes);
  if (cfg.reshard_enabled) {
    dyn_map = uniform_partition(hist_cfgs[rdim].min, hist_cfgs[rdim].max, n_nodes, rdim);
    static_map = dyn_map;
  }

  std::optional<HotKeyCache> cache_fresh, cache_frozen;
  bool frozen_filled = false;
  if (cfg.cache_enabled) {
    cache_fresh.emplace(cfg.cache_capacity);
    cache_frozen.emplace(cfg.cache_capacity);
  }

  TraceWriter w(trace_out);
  const uint64_t total = n_epochs * per_epoch;
  for (uint64_t i = 0; i < total; ++i) {
    const Record& rec = gen.next();
    uint32_t sw = rec.source_node / cfg.nodes_per_switch;
    planes[sw].observe(rec);
    ledger_source.add(rec.source_node);
    if (cfg.reshard_enabled) {
      double v = static_cast<double>(rec.values[rdim]);
      ledger_dyn.add(route(dyn_map, v));
      ledger_static.add(route(static_map, v));
    }
    if (cfg.cache_enabled) {
      cache_fresh->lookup(rec.values[cfg.cache_dimension]);
      cache_frozen->lookup(rec.values[cfg.cache_dimension]);
    }
    if ((i + 1) % per_epoch != 0) continue;

    // ---- epoch close ----
    const uint64_t epoch = i / per_epoch;
    const uint64_t now = i + 1;  // record-count clock

    std::optional<DimHistogram> epoch0_hist;
    for (uint32_t s = 0; s < n_switches; ++s) {
      EpochSnapshot snap = planes[s].rotate_epoch();
      if (cfg.reshard_enabled && epoch == 0) {
        if (!epoch0_hist) epoch0_hist = snap.histograms[rdim];
        else epoch0_hist->merge(snap.histograms[rdim]);
      }
      const EstimateSet& set = locals[s].local_compute(snap, now);
      emit_estimates(w, set, epoch, "local", std::to_string(s), mask);
      api.deliver_local(set, epoch);
    }
    if (epoch0_hist && epoch0_hist->total() > 0) {
      static_map = compute_partition(*epoch0_hist, n_nodes, rdim, 0);
      dyn_map = static_map;
      reshard.emplace(ReshardConfig{rdim, n_nodes, cfg.reshard_window,
                                    cfg.imbalance_theta, cfg.score_mult},
                      dyn_map);
    }

    ledger_source.close_epoch();
    for (uint32_t n = 0; n < n_nodes; ++n)
      w.row(epoch, "node", std::to_string(n), "-", "load_source",
            static_cast<double>(ledger_source.epoch_counts(epoch)[n]), 0);
    if (cfg.reshard_enabled) {
      ledger_dyn.close_epoch();
      ledger_static.close_epoch();
      for (uint32_t n = 0; n < n_nodes; ++n) {
        w.row(epoch, "node", std::to_string(n), "-", "load_dynamic",
              static_cast<double>(ledger_dyn.epoch_counts(epoch)[n]), 0);
        w.row(epoch, "node", std::to_string(n), "-", "load_static",
              static_cast<double>(ledger_static.epoch_counts(epoch)[n]), 0);
      }
      w.row(epoch, "global", "central", "-", "imbalance_dynamic",
            ledger_dyn.imbalance(epoch), 0);
      w.row(epoch, "global", "central", "-", "imbalance_static",
            ledger_static.imbalance(epoch), 0);
      if (reshard) reshard->note_imbalance(ledger_dyn.imbalance(epoch));
    }
    if (cfg.cache_enabled) {
      w.row(epoch, "global", "central", "-", "cache_hit_fresh",
            cache_fresh->hit_rate(), 0);
      w.row(epoch, "global", "central", "-", "cache_hit_frozen",
            cache_frozen->hit_rate(), 0);
      cache_fresh->reset_counters();
      cache_frozen->reset_counters();
    }

    // ---- sync round ----
    if ((epoch + 1) % cfg.sync_period == 0) {
      uint64_t round = (epoch + 1) / cfg.sync_period;
      std::vector<SyncMessage> uploads;
      uploads.reserve(n_switches);
      for (uint32_t s = 0; s < n_switches; ++s)
        uploads.push_back(locals[s].make_upload(round));
      auto result = central.sync_round(round, uploads, now);
      for (uint32_t s = 0; s < n_switches; ++s)
        locals[s].receive_global(result.downloads[s], now);
      emit_estimates(w, result.global, epoch, "global", "central", mask);
      api.deliver_global(result.global, epoch);

      if (cfg.reshard_enabled && reshard) {
        const EstimateSet& seen =
            api.subscription(sub_ids.reshard_id).buffer->newest().set;
        auto next = reshard->reshard_step(seen);
        w.row(epoch, "global", "central", "-", "reshard_version",
              static_cast<double>(reshard->current().version), 0);
        if (next) {
          dyn_map = *next;
          w.row(epoch, "global", "central", "-", "moved_mass",
                reshard->last_moved_mass(), 0);
        }
      }
      if (cfg.cache_enabled) {
        const EstimateSet& seen =
            api.subscription(sub_ids.cache_id).buffer->newest().set;
        const EstimateEntry* hh =
            seen.find(cfg.cache_dimension, MetricKind::HeavyHitters);
        if (hh != nullptr && hh->absent_reason.empty()) {
          cache_fresh->refresh(hh->hh);
          if (!frozen_filled) {
            cache_frozen->refresh(hh->hh);
            frozen_filled = true;
          }
        }
      }
    }

    // delivery-age samples for the configured subscriptions: the age in
    // epochs of the newest set a service polling the buffer now would see
    for (size_t k = 0; k < cfg.subscriptions.size(); ++k) {
      const Subscription& sub = api.subscription(sub_ids.config_ids[k]);
      if (!sub.buffer || sub.buffer->size() == 0) continue;
      uint64_t age = epoch - sub.buffer->newest().set.epoch;
      const char* scope = sub.timing == Timing::Tight ? "local" : "global";
      w.row(epoch, scope, "-", "-", "staleness_" + cfg.subscriptions[k].name,
            static_cast<double>(age), age);
    }
  }
}

std::string manifest_json(const RunConfig& cfg, const std::string& command) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["seed"] = cfg.seed;
  j["topology"] = {{"switches", cfg.switches},
                   {"nodes_per_switch", cfg.nodes_per_switch}};
  j["sketch"] = {{"depth", cfg.geometry.depth},   {"width", cfg.geometry.width},
                 {"levels", cfg.geometry.levels}, {"track_k", cfg.geometry.track_k},
                 {"sampling_p", cfg.sampling_p},  {"seed", cfg.geometry.seed}};
  nlohmann::ordered_json dims = nlohmann::ordered_json::array();
  for (const DimSchedule& d : cfg.schedule.dims) {
    nlohmann::ordered_json dj;
    dj["dist"] = d.dist == DistKind::Zipf ? "zipf" : "lognormal";
    dj["keys"] = d.keys;
    dj["s"] = d.zipf_s;
    dj["mu"] = d.mu;
    dj["sigma"] = d.sigma;
    switch (d.drift) {
      case DriftKind::None: dj["drift"] = "none"; break;
      case DriftKind::Ramp: dj["drift"] = "ramp"; break;
      case DriftKind::AbruptShift: dj["drift"] = "abrupt_shift"; break;
      case DriftKind::Concentration: dj["drift"] = "concentration"; break;
    }
    dj["rate"] = d.rate;
    dj["shift_epoch"] = d.shift_epoch;
    dj["shift_delta"] = d.shift_delta;
    dims.push_back(dj);
  }
  j["workload"] = {{"records", cfg.records},
                   {"epoch_records", cfg.epoch_records},
                   {"epochs", cfg.epochs()},
                   {"seed", cfg.schedule.seed},
                   {"dimensions", dims}};
  j["services"] = {{"reshard", cfg.reshard_enabled},
                   {"reshard_dimension", cfg.reshard_dimension},
                   {"window", cfg.reshard_window},
                   {"imbalance_theta", cfg.imbalance_theta},
                   {"score_mult", cfg.score_mult},
                   {"cache", cfg.cache_enabled},
                   {"cache_dimension", cfg.cache_dimension},
                   {"cache_capacity", cfg.cache_capacity}};
  nlohmann::ordered_json subs = nlohmann::ordered_json::array();
  for (const SubscriptionConfig& sc : cfg.subscriptions) {
    nlohmann::ordered_json sj;
    sj["name"] = sc.name;
    sj["attributes"] = sc.attributes;
    std::vector<std::string> metric_names;
    for (MetricKind m : sc.metrics) metric_names.push_back(metric_name(m));
    sj["metrics"] = metric_names;
    sj["timing"] = timing_name(sc.timing);
    sj["buffer"] = sc.buffer;
    subs.push_back(sj);
  }
  j["api"] = subs;
  j["run"] = {{"sync_period", cfg.sync_period},
              {"hh_threshold", cfg.hh_threshold},
              {"histogram_buckets", cfg.histogram_buckets}};
  return j.dump(2) + "\n";
}

}  // namespace sketchloop
