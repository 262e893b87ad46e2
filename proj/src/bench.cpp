#include "sketchloop/bench.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_map>

#include "sketchloop/univ_sketch.hpp"
#include "sketchloop/workload.hpp"

namespace sketchloop {

namespace {

// Sampling arms: a high-volume stream over a universe wide enough that
// table collision noise, not the key tail, dominates the p=1 error.
constexpr uint32_t kStreamKeys = 100000;
constexpr double kStreamS = 1.0;
constexpr uint64_t kStreamN = 4'000'000;
constexpr size_t kTopK = 64;

// Skewed-mix arm: four dimensions, one carrying most of the traffic.
constexpr uint64_t kMixN = 1'000'000;
constexpr uint32_t kMixKeys = 10000;
constexpr double kMixS = 1.1;
constexpr std::array<double, 4> kMixShares = {0.7, 0.1, 0.1, 0.1};

constexpr uint32_t kUnbiasRuns = 50;
constexpr size_t kUnbiasTop = 10;

std::vector<uint64_t> materialize_zipf(uint32_t keys, double s, uint64_t n,
                                       uint64_t seed) {
  WorkloadSchedule sched;
  DimSchedule dim;
  dim.dist = DistKind::Zipf;
  dim.keys = keys;
  dim.zipf_s = s;
  sched.dims.push_back(dim);
  sched.seed = seed;
  WorkloadGen gen(sched, n, 1);
  std::vector<uint64_t> out;
  out.reserve(n);
  for (uint64_t i = 0; i < n; ++i) out.push_back(gen.next().values[0]);
  return out;
}

// exact top keys, count desc then key asc
std::vector<std::pair<uint64_t, uint64_t>> exact_top(
    const std::vector<uint64_t>& stream, size_t k) {
  std::unordered_map<uint64_t, uint64_t> counts;
  for (uint64_t key : stream) ++counts[key];
  std::vector<std::pair<uint64_t, uint64_t>> all(counts.begin(), counts.end());
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

struct ErrPair {
  double rel = 0.0;
  double abs = 0.0;
};

template <typename EstimateFn>
ErrPair top_key_error(const std::vector<std::pair<uint64_t, uint64_t>>& top,
                      EstimateFn est) {
  ErrPair e;
  for (const auto& [key, truth] : top) {
    double d = std::abs(static_cast<double>(est(key)) - static_cast<double>(truth));
    e.abs += d;
    e.rel += d / static_cast<double>(truth);
  }
  e.abs /= static_cast<double>(top.size());
  e.rel /= static_cast<double>(top.size());
  return e;
}

SketchGeometry bench_geometry(uint64_t seed, uint32_t dims, uint32_t width) {
  SketchGeometry g;
  g.depth = 5;
  g.width = width;
  g.levels = 16;
  g.track_k = 64;
  g.dimensions = dims;
  g.seed = sub_seed(seed, "bench-sketch");
  return g;
}

}  // namespace

uint64_t sketch_memory_bytes(const SketchGeometry& g) {
  uint64_t counters =
      uint64_t{g.levels} * g.depth * g.width * sizeof(int64_t);
  uint64_t trackers = uint64_t{g.dimensions} * g.levels * g.track_k *
                      (sizeof(uint64_t) + sizeof(int64_t));
  return counters + trackers;
}

BenchReport run_sketch_bench(uint64_t seed) {
  BenchReport r;
  r.seed = seed;
  r.mix_shares.assign(kMixShares.begin(), kMixShares.end());

  // ---- sampling arms -----------------------------------------------------
  const std::vector<uint64_t> stream =
      materialize_zipf(kStreamKeys, kStreamS, kStreamN, sub_seed(seed, "bench-stream"));
  const auto top = exact_top(stream, kTopK);
  const SketchGeometry geom = bench_geometry(seed, 1, 2048);

  for (double p : {1.0, 0.5, 0.1}) {
    MergedUnivSketch sk(geom, p);
    for (uint64_t key : stream) sk.update(0, key);
    BenchArm arm;
    arm.p = p;
    arm.memory_bytes = sketch_memory_bytes(geom);
    arm.stats = sk.stats();
    ErrPair e = top_key_error(top, [&](uint64_t k) { return sk.estimate(0, k); });
    arm.rel_are = e.rel;
    arm.abs_err = e.abs;
    r.arms.push_back(arm);
  }
  const BenchArm& full = r.arms.front();
  const BenchArm& tenth = r.arms.back();
  r.hash_ratio = static_cast<double>(full.stats.hash_evals()) /
                 static_cast<double>(tenth.stats.hash_evals());
  r.row_hash_ratio = static_cast<double>(full.stats.row_hash_evals) /
                     static_cast<double>(tenth.stats.row_hash_evals);
  r.rel_are_ratio = tenth.rel_are / full.rel_are;
  r.abs_err_ratio = tenth.abs_err / full.abs_err;

  // ---- sampling bias probe ------------------------------------------------
  // Tables keep one seed while the sampling stream is re-seeded per run, so
  // averaging over runs isolates sampling bias from (fixed) collision bias.
  r.unbias_runs = kUnbiasRuns;
  std::vector<double> mean_est(kUnbiasTop, 0.0);
  for (uint32_t run = 0; run < kUnbiasRuns; ++run) {
    MergedUnivSketch sk(geom, 0.1,
                        sub_seed(sub_seed(seed, "bench-unbias"), std::to_string(run)));
    for (uint64_t key : stream) sk.update(0, key);
    for (size_t i = 0; i < kUnbiasTop; ++i)
      mean_est[i] += static_cast<double>(sk.estimate(0, top[i].first));
  }
  for (size_t i = 0; i < kUnbiasTop; ++i) {
    double mean = mean_est[i] / kUnbiasRuns;
    double truth = static_cast<double>(top[i].second);
    r.unbias_worst_dev =
        std::max(r.unbias_worst_dev, std::abs(mean - truth) / truth);
  }

  // ---- merged vs separate, skewed mix --------------------------------------
  // One update stream where each update carries a single dimension; dimension
  // 0 owns 70% of the traffic. The merged sketch gives every dimension the
  // full 2048-column table; the separate sketches split the same counter
  // memory four ways.
  {
    WorkloadSchedule sched;
    for (size_t d = 0; d < kMixShares.size(); ++d) {
      DimSchedule dim;
      dim.dist = DistKind::Zipf;
      dim.keys = kMixKeys;
      dim.zipf_s = kMixS;
      sched.dims.push_back(dim);
    }
    sched.seed = sub_seed(seed, "bench-mix-stream");
    WorkloadGen gen(sched, kMixN, 1);
    SplitMix64 pick(sub_seed(seed, "bench-mix-pick"));

    const uint32_t n_dims = static_cast<uint32_t>(kMixShares.size());
    SketchGeometry merged_geom = bench_geometry(seed, n_dims, 2048);
    MergedUnivSketch merged(merged_geom);
    SketchGeometry sep_geom = bench_geometry(seed, 1, 512);
    std::vector<UnivSketch> separate;
    for (uint32_t d = 0; d < n_dims; ++d)
      separate.emplace_back(sep_geom.depth, sep_geom.width, sep_geom.levels,
                            sep_geom.track_k, sub_seed(sep_geom.seed, std::to_string(d)));

    std::vector<std::unordered_map<uint64_t, uint64_t>> exact(n_dims);
    std::vector<uint64_t> traffic(n_dims, 0);
    for (uint64_t i = 0; i < kMixN; ++i) {
      const Record& rec = gen.next();
      double u = pick.next_unit();
      uint32_t d = 0;
      double cum = 0.0;
      for (; d + 1 < n_dims; ++d) {
        cum += kMixShares[d];
        if (u < cum) break;
      }
      uint64_t key = rec.values[d];
      merged.update(d, key);
      separate[d].update(key);
      ++exact[d][key];
      ++traffic[d];
    }

    for (uint32_t d = 0; d < n_dims; ++d) {
      std::vector<std::pair<uint64_t, uint64_t>> all(exact[d].begin(), exact[d].end());
      std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
      });
      if (all.size() > kTopK) all.resize(kTopK);
      double w = static_cast<double>(traffic[d]) / static_cast<double>(kMixN);
      double me =
          top_key_error(all, [&](uint64_t k) { return merged.estimate(d, k); }).abs;
      double se =
          top_key_error(all, [&](uint64_t k) { return separate[d].estimate(k); }).abs;
      r.merged_dim_err.push_back(me);
      r.separate_dim_err.push_back(se);
      r.merged_err += w * me;
      r.separate_err += w * se;
    }
    r.merged_memory = sketch_memory_bytes(merged_geom);
    r.separate_memory = n_dims * sketch_memory_bytes(sep_geom);
    r.merged_stats = merged.stats();
    for (const UnivSketch& s : separate) {
      SketchStats st = s.stats();
      r.separate_stats.level_hash_evals += st.level_hash_evals;
      r.separate_stats.row_hash_evals += st.row_hash_evals;
      r.separate_stats.counter_updates += st.counter_updates;
      r.separate_stats.sampling_draws += st.sampling_draws;
    }
  }

  // ---- D=1 degenerate equivalence ------------------------------------------
  // Same geometry, same seed, same stream: the merged wrapper must agree
  // with a lone sketch bit for bit, so the errors match exactly.
  {
    std::vector<uint64_t> short_stream(stream.begin(), stream.begin() + kMixN);
    const auto d1_top = exact_top(short_stream, kTopK);
    MergedUnivSketch merged(geom);
    UnivSketch lone(geom.depth, geom.width, geom.levels, geom.track_k, geom.seed);
    for (uint64_t key : short_stream) {
      merged.update(0, key);
      lone.update(key);
    }
    r.d1_merged_err =
        top_key_error(d1_top, [&](uint64_t k) { return merged.estimate(0, k); }).rel;
    r.d1_separate_err =
        top_key_error(d1_top, [&](uint64_t k) { return lone.estimate(k); }).rel;
  }

  return r;
}

void write_bench_report(const BenchReport& r, std::ostream& out) {
  char buf[256];
  auto line = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    out << buf << '\n';
  };

  line("sketch-bench seed=%llu", static_cast<unsigned long long>(r.seed));
  line("sampling stream: zipf(s=%.2f) keys=%u n=%llu, geometry d=5 w=2048 L=16 k=64",
       kStreamS, kStreamKeys, static_cast<unsigned long long>(kStreamN));
  line("error metric: mean relative / absolute estimate error over exact top-%zu keys",
       kTopK);
  line("%-5s %12s %14s %14s %16s %10s %12s", "p", "memory_B", "hash_evals",
       "row_hashes", "counter_updates", "rel_are", "abs_err");
  for (const BenchArm& a : r.arms)
    line("%-5.2g %12llu %14llu %14llu %16llu %10.5f %12.2f", a.p,
         static_cast<unsigned long long>(a.memory_bytes),
         static_cast<unsigned long long>(a.stats.hash_evals()),
         static_cast<unsigned long long>(a.stats.row_hash_evals),
         static_cast<unsigned long long>(a.stats.counter_updates), a.rel_are,
         a.abs_err);
  line("p=1 vs p=0.1 ratios: hash %.2fx, row-hash %.2fx; error p=0.1/p=1: rel %.2fx, abs %.2fx",
       r.hash_ratio, r.row_hash_ratio, r.rel_are_ratio, r.abs_err_ratio);
  line("sampling bias probe: %u runs at p=0.1, top-%zu keys, worst mean deviation %.3f%%",
       r.unbias_runs, kUnbiasTop, 100.0 * r.unbias_worst_dev);
  out << '\n';
  line("merged vs separate at equal memory, D=%zu mix shares 0.7/0.1/0.1/0.1, "
       "zipf(s=%.2f) keys=%u n=%llu",
       r.mix_shares.size(), kMixS, kMixKeys, static_cast<unsigned long long>(kMixN));
  line("error metric: traffic-weighted mean |estimate error| over exact top-%zu keys per dim",
       kTopK);
  line("  merged   (one sketch, w=2048): memory %llu B, weighted err %.2f",
       static_cast<unsigned long long>(r.merged_memory), r.merged_err);
  line("  separate (4 sketches, w=512):  memory %llu B, weighted err %.2f",
       static_cast<unsigned long long>(r.separate_memory), r.separate_err);
  for (size_t d = 0; d < r.merged_dim_err.size(); ++d)
    line("  dim %zu (share %.1f): merged %.2f, separate %.2f", d, r.mix_shares[d],
         r.merged_dim_err[d], r.separate_dim_err[d]);
  line("  merged/separate error ratio: %.3f", r.merged_err / r.separate_err);
  line("D=1 equivalence: merged rel err %.6f, standalone rel err %.6f (%s)",
       r.d1_merged_err, r.d1_separate_err,
       r.d1_merged_err == r.d1_separate_err ? "identical" : "DIFFER");
}

}  // namespace sketchloop
