#include "sketchloop/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "sketchloop/hash.hpp"

namespace sketchloop {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

struct Entry {
  std::string value;
  int line;
  bool used = false;
};

// section -> key -> entry
using Sections = std::map<std::string, std::map<std::string, Entry>>;

class Reader {
 public:
  Reader(Sections sections) : sections_(std::move(sections)) {}

  bool has_section(const std::string& s) const { return sections_.count(s) != 0; }

  Entry* find(const std::string& section, const std::string& key) {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.used = true;
    return &k->second;
  }

  uint64_t get_u64(const std::string& sec, const std::string& key, uint64_t dflt) {
    Entry* e = find(sec, key);
    if (e == nullptr) return dflt;
    try {
      size_t pos = 0;
      uint64_t v = std::stoull(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      fail(e->line, "field " + sec + "." + key + " wants an unsigned integer, got '" +
                        e->value + "'");
    }
  }

  double get_f64(const std::string& sec, const std::string& key, double dflt) {
    Entry* e = find(sec, key);
    if (e == nullptr) return dflt;
    try {
      size_t pos = 0;
      double v = std::stod(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      fail(e->line, "field " + sec + "." + key + " wants a number, got '" +
                        e->value + "'");
    }
  }

  bool get_bool(const std::string& sec, const std::string& key, bool dflt) {
    Entry* e = find(sec, key);
    if (e == nullptr) return dflt;
    if (e->value == "true" || e->value == "1" || e->value == "on") return true;
    if (e->value == "false" || e->value == "0" || e->value == "off") return false;
    fail(e->line, "field " + sec + "." + key + " wants true/false, got '" +
                      e->value + "'");
  }

  std::string get_str(const std::string& sec, const std::string& key,
                      const std::string& dflt) {
    Entry* e = find(sec, key);
    return e == nullptr ? dflt : e->value;
  }

  // Keys of a section sharing a dotted prefix group, e.g. "sub0" from
  // "sub0.metrics".
  std::vector<std::string> prefixes(const std::string& sec) const {
    std::vector<std::string> out;
    auto s = sections_.find(sec);
    if (s == sections_.end()) return out;
    for (const auto& [key, entry] : s->second) {
      size_t dot = key.find('.');
      if (dot == std::string::npos) continue;
      std::string p = key.substr(0, dot);
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
    return out;
  }

  void check_all_used(const std::vector<std::string>& known_sections) const {
    for (const auto& [sec, keys] : sections_) {
      if (std::find(known_sections.begin(), known_sections.end(), sec) ==
          known_sections.end()) {
        fail(keys.empty() ? 0 : keys.begin()->second.line,
             "unknown section [" + sec + "]");
      }
      for (const auto& [key, entry] : keys) {
        if (!entry.used)
          fail(entry.line, "unknown field " + sec + "." + key);
      }
    }
  }

 private:
  Sections sections_;
};

Sections tokenize(const std::string& text) {
  Sections out;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    size_t hash = raw.find_first_of("#;");
    std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) fail(line, "empty section name");
      out[section];  // a section may legitimately hold only defaults
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value, got '" + s + "'");
    if (section.empty()) fail(line, "key before any [section] header");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail(line, "empty key");
    auto [it, inserted] = out[section].emplace(key, Entry{value, line});
    if (!inserted) fail(line, "duplicate key " + section + "." + key);
  }
  return out;
}

DistKind dist_from_name(const std::string& name, int line) {
  if (name == "zipf") return DistKind::Zipf;
  if (name == "lognormal") return DistKind::Lognormal;
  fail(line, "unknown distribution '" + name + "' (zipf | lognormal)");
}

DriftKind drift_from_name(const std::string& name, int line) {
  if (name == "none") return DriftKind::None;
  if (name == "ramp") return DriftKind::Ramp;
  if (name == "abrupt_shift") return DriftKind::AbruptShift;
  if (name == "concentration") return DriftKind::Concentration;
  fail(line, "unknown drift '" + name +
                 "' (none | ramp | abrupt_shift | concentration)");
}

}  // namespace

uint64_t RunConfig::workload_seed() const { return sub_seed(seed, "workload"); }
uint64_t RunConfig::sketch_seed() const { return sub_seed(seed, "sketch"); }

void RunConfig::resolve() {
  if (switches < 1) throw ConfigError("topology.switches must be >= 1");
  if (nodes_per_switch < 1)
    throw ConfigError("topology.nodes_per_switch must be >= 1");
  if (epoch_records < 1) throw ConfigError("workload.epoch_records must be >= 1");
  if (schedule.dims.empty())
    throw ConfigError("workload must declare at least one dimension");
  if (sampling_p <= 0.0 || sampling_p > 1.0)
    throw ConfigError("sketch.sampling_p must be in (0, 1]");
  if (sync_period < 1) throw ConfigError("run.sync_period must be >= 1");
  if (hh_threshold <= 0.0 || hh_threshold >= 1.0)
    throw ConfigError("run.hh_threshold must be in (0, 1)");
  if (histogram_buckets < 2)
    throw ConfigError("run.histogram_buckets must be >= 2");

  geometry.dimensions = static_cast<uint32_t>(schedule.dims.size());
  geometry.seed = sketch_seed();
  schedule.seed = workload_seed();
  try {
    geometry.validate();
    schedule.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  if (reshard_enabled && reshard_dimension >= schedule.dims.size())
    throw ConfigError("services.reshard_dimension is not a configured dimension");
  if (cache_enabled && cache_dimension >= schedule.dims.size())
    throw ConfigError("services.cache_dimension is not a configured dimension");
  if (cache_enabled && cache_capacity < 1)
    throw ConfigError("services.cache_capacity must be >= 1");

  auto names = dimension_names();
  for (const SubscriptionConfig& sub : subscriptions) {
    if (sub.attributes.empty())
      throw ConfigError("subscription " + sub.name + " has no attributes");
    if (sub.metrics.empty())
      throw ConfigError("subscription " + sub.name + " has no metrics");
    if (sub.buffer < 1)
      throw ConfigError("subscription " + sub.name + " needs buffer >= 1");
    for (const std::string& a : sub.attributes)
      if (std::find(names.begin(), names.end(), a) == names.end())
        throw ConfigError("subscription " + sub.name + " names unknown dimension " + a);
  }
}

std::vector<std::string> RunConfig::dimension_names() const {
  std::vector<std::string> names;
  for (size_t d = 0; d < schedule.dims.size(); ++d)
    names.push_back("dim" + std::to_string(d));
  return names;
}

std::vector<HistogramConfig> RunConfig::histogram_configs() const {
  std::vector<HistogramConfig> cfgs;
  for (const DimSchedule& d : schedule.dims)
    cfgs.push_back(d.histogram_config(histogram_buckets));
  return cfgs;
}

RunConfig parse_config(const std::string& text) {
  Reader r(tokenize(text));
  if (!r.has_section("workload"))
    throw ConfigError("missing required section [workload]");

  RunConfig cfg;
  cfg.switches = static_cast<uint32_t>(r.get_u64("topology", "switches", cfg.switches));
  cfg.nodes_per_switch = static_cast<uint32_t>(
      r.get_u64("topology", "nodes_per_switch", cfg.nodes_per_switch));

  cfg.geometry.depth =
      static_cast<uint32_t>(r.get_u64("sketch", "depth", cfg.geometry.depth));
  cfg.geometry.width =
      static_cast<uint32_t>(r.get_u64("sketch", "width", cfg.geometry.width));
  cfg.geometry.levels =
      static_cast<uint32_t>(r.get_u64("sketch", "levels", cfg.geometry.levels));
  cfg.geometry.track_k =
      static_cast<uint32_t>(r.get_u64("sketch", "track_k", cfg.geometry.track_k));
  cfg.sampling_p = r.get_f64("sketch", "sampling_p", cfg.sampling_p);

  uint64_t dims = r.get_u64("workload", "dimensions", 1);
  if (dims < 1 || dims > 64)
    throw ConfigError("workload.dimensions must be in [1, 64]");
  cfg.records = r.get_u64("workload", "records", cfg.records);
  cfg.epoch_records = r.get_u64("workload", "epoch_records", cfg.epoch_records);
  for (uint64_t d = 0; d < dims; ++d) {
    std::string p = "dim" + std::to_string(d);
    DimSchedule ds;
    if (Entry* e = r.find("workload", p + ".dist"))
      ds.dist = dist_from_name(e->value, e->line);
    ds.keys = static_cast<uint32_t>(r.get_u64("workload", p + ".keys", ds.keys));
    ds.zipf_s = r.get_f64("workload", p + ".s", ds.zipf_s);
    ds.mu = r.get_f64("workload", p + ".mu", ds.mu);
    ds.sigma = r.get_f64("workload", p + ".sigma", ds.sigma);
    if (Entry* e = r.find("workload", p + ".drift"))
      ds.drift = drift_from_name(e->value, e->line);
    ds.rate = r.get_f64("workload", p + ".rate", ds.rate);
    ds.shift_epoch = r.get_u64("workload", p + ".shift_epoch", ds.shift_epoch);
    ds.shift_delta = r.get_f64("workload", p + ".shift_delta", ds.shift_delta);
    cfg.schedule.dims.push_back(ds);
  }
  // reject dimN.* groups beyond the declared count
  for (const std::string& p : r.prefixes("workload")) {
    if (p.rfind("dim", 0) != 0)
      throw ConfigError("unknown field group workload." + p);
    uint64_t idx = 0;
    try {
      idx = std::stoull(p.substr(3));
    } catch (const std::exception&) {
      throw ConfigError("unknown field group workload." + p);
    }
    if (idx >= dims)
      throw ConfigError("workload." + p + " is declared but dimensions = " +
                        std::to_string(dims));
  }

  cfg.reshard_enabled = r.get_bool("services", "reshard", cfg.reshard_enabled);
  cfg.reshard_dimension = static_cast<uint32_t>(
      r.get_u64("services", "reshard_dimension", cfg.reshard_dimension));
  cfg.reshard_window =
      static_cast<uint32_t>(r.get_u64("services", "window", cfg.reshard_window));
  cfg.imbalance_theta =
      r.get_f64("services", "imbalance_theta", cfg.imbalance_theta);
  cfg.score_mult = r.get_f64("services", "score_mult", cfg.score_mult);
  cfg.cache_enabled = r.get_bool("services", "cache", cfg.cache_enabled);
  cfg.cache_dimension = static_cast<uint32_t>(
      r.get_u64("services", "cache_dimension", cfg.cache_dimension));
  cfg.cache_capacity = static_cast<uint32_t>(
      r.get_u64("services", "cache_capacity", cfg.cache_capacity));

  for (const std::string& p : r.prefixes("api")) {
    SubscriptionConfig sub;
    sub.name = p;
    sub.attributes = split_csv(r.get_str("api", p + ".attributes", ""));
    Entry* m = r.find("api", p + ".metrics");
    if (m != nullptr) {
      for (const std::string& name : split_csv(m->value)) {
        auto kind = metric_from_name(name);
        if (!kind) fail(m->line, "unknown metric '" + name + "'");
        sub.metrics.push_back(*kind);
      }
    }
    if (Entry* t = r.find("api", p + ".timing")) {
      try {
        sub.timing = timing_from_name(t->value);
      } catch (const std::invalid_argument& e) {
        fail(t->line, e.what());
      }
    }
    sub.buffer = static_cast<uint32_t>(r.get_u64("api", p + ".buffer", sub.buffer));
    cfg.subscriptions.push_back(std::move(sub));
  }

  cfg.seed = r.get_u64("run", "seed", cfg.seed);
  cfg.sync_period =
      static_cast<uint32_t>(r.get_u64("run", "sync_period", cfg.sync_period));
  cfg.hh_threshold = r.get_f64("run", "hh_threshold", cfg.hh_threshold);
  cfg.histogram_buckets = static_cast<uint32_t>(
      r.get_u64("run", "histogram_buckets", cfg.histogram_buckets));

  r.check_all_used({"topology", "sketch", "workload", "services", "api", "run"});
  cfg.resolve();
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace sketchloop
