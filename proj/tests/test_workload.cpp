#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <vector>

#include "doctest.h"
#include "sketchloop/workload.hpp"

using namespace sketchloop;

namespace {

// chi-squared critical value at alpha = 0.01 for 20 degrees of freedom
constexpr double kChi2Crit20 = 37.566;

DimSchedule zipf_dim(uint32_t keys, double s) {
  DimSchedule d;
  d.dist = DistKind::Zipf;
  d.keys = keys;
  d.zipf_s = s;
  return d;
}

DimSchedule lognormal_dim(double mu, double sigma) {
  DimSchedule d;
  d.dist = DistKind::Lognormal;
  d.mu = mu;
  d.sigma = sigma;
  return d;
}

// top-19 ranks individually plus one tail bin
std::vector<uint64_t> binned_counts(const std::vector<uint64_t>& values) {
  std::vector<uint64_t> bins(21, 0);
  for (uint64_t v : values) bins[v < 20 ? v : 20]++;
  return bins;
}

double exact_entropy_bits(const std::vector<uint64_t>& values) {
  std::unordered_map<uint64_t, uint64_t> freq;
  for (uint64_t v : values) ++freq[v];
  double h = 0, n = static_cast<double>(values.size());
  for (const auto& [k, c] : freq) {
    double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

TEST_CASE("identical schedule and seed give identical streams") {
  WorkloadSchedule ws;
  ws.dims = {zipf_dim(1000, 1.1), lognormal_dim(7.0, 0.5)};
  ws.seed = 77;
  WorkloadGen a(ws, 500, 8), b(ws, 500, 8);
  for (int i = 0; i < 2000; ++i) {
    const Record& ra = a.next();
    CHECK(ra.values == b.next().values);
  }
}

TEST_CASE("records carry round-robin sources and a record-count clock") {
  WorkloadSchedule ws;
  ws.dims = {zipf_dim(100, 1.0)};
  ws.seed = 1;
  WorkloadGen g(ws, 100, 3);
  uint64_t prev_ts = 0;
  for (int i = 0; i < 300; ++i) {
    const Record& r = g.next();
    CHECK(r.source_node == static_cast<uint32_t>(i % 3));
    CHECK(r.timestamp == static_cast<uint64_t>(i));
    CHECK(r.timestamp >= prev_ts);
    CHECK(r.values.size() == 1);
    prev_ts = r.timestamp;
  }
  CHECK(g.emitted() == 300);
}

TEST_CASE("zipf epoch-0 empirical distribution matches the schedule") {
  WorkloadSchedule ws;
  ws.dims = {zipf_dim(1000, 1.2)};
  ws.seed = 99;
  const int n = 20000;
  WorkloadGen g(ws, n, 1);
  std::vector<uint64_t> vals;
  vals.reserve(n);
  for (int i = 0; i < n; ++i) vals.push_back(g.next().values[0]);

  double norm = 0;
  std::vector<double> p(1000);
  for (int r = 0; r < 1000; ++r) {
    p[r] = std::pow(r + 1.0, -1.2);
    norm += p[r];
  }
  for (auto& x : p) x /= norm;

  auto bins = binned_counts(vals);
  double chi2 = 0;
  double tail_p = 1.0;
  for (int r = 0; r < 20; ++r) {
    double expect = p[r] * n;
    double diff = static_cast<double>(bins[r]) - expect;
    chi2 += diff * diff / expect;
    tail_p -= p[r];
  }
  double tail_expect = tail_p * n;
  double tail_diff = static_cast<double>(bins[20]) - tail_expect;
  chi2 += tail_diff * tail_diff / tail_expect;
  std::printf("[probe] zipf goodness-of-fit chi2 %.2f (crit %.2f)\n", chi2, kChi2Crit20);
  CHECK(chi2 < kChi2Crit20);
}

TEST_CASE("drift disabled: first and hundredth epoch distributions agree") {
  WorkloadSchedule ws;
  ws.dims = {zipf_dim(500, 1.1)};
  ws.seed = 5;
  const int per_epoch = 10000;
  WorkloadGen g(ws, per_epoch, 1);
  std::vector<uint64_t> e0, e100;
  for (int e = 0; e <= 100; ++e)
    for (int i = 0; i < per_epoch; ++i) {
      uint64_t v = g.next().values[0];
      if (e == 0) e0.push_back(v);
      if (e == 100) e100.push_back(v);
    }
  auto b0 = binned_counts(e0);
  auto b1 = binned_counts(e100);
  double chi2 = 0;
  for (int i = 0; i < 21; ++i) {
    double a = static_cast<double>(b0[i]), b = static_cast<double>(b1[i]);
    if (a + b > 0) chi2 += (a - b) * (a - b) / (a + b);
  }
  std::printf("[probe] stationarity two-sample chi2 %.2f (crit %.2f)\n", chi2,
              kChi2Crit20);
  CHECK(chi2 < kChi2Crit20);
}

TEST_CASE("abrupt lognormal shift moves the per-epoch mean by the delta") {
  DimSchedule d = lognormal_dim(7.0, 0.4);
  d.drift = DriftKind::AbruptShift;
  d.shift_epoch = 5;
  d.shift_delta = 800;
  WorkloadSchedule ws;
  ws.dims = {d};
  ws.seed = 31;
  const int per_epoch = 20000;
  WorkloadGen g(ws, per_epoch, 1);
  std::vector<double> means;
  for (int e = 0; e < 8; ++e) {
    double sum = 0;
    for (int i = 0; i < per_epoch; ++i) sum += static_cast<double>(g.next().values[0]);
    means.push_back(sum / per_epoch);
  }
  double jump = means[5] - means[4];
  std::printf("[probe] means around shift: %.1f -> %.1f (jump %.1f)\n", means[4],
              means[5], jump);
  CHECK(std::abs(jump - 800.0) < 25.0);
  // neighboring stationary epochs move by sampling noise only
  CHECK(std::abs(means[4] - means[3]) < 25.0);
  CHECK(std::abs(means[7] - means[6]) < 25.0);
}

TEST_CASE("abrupt zipf shift relabels the hot keys") {
  DimSchedule d = zipf_dim(1000, 1.3);
  d.drift = DriftKind::AbruptShift;
  d.shift_epoch = 2;
  d.shift_delta = 137;
  WorkloadSchedule ws;
  ws.dims = {d};
  ws.seed = 8;
  const int per_epoch = 5000;
  WorkloadGen g(ws, per_epoch, 1);
  std::unordered_map<uint64_t, uint64_t> before, after;
  for (int e = 0; e < 4; ++e)
    for (int i = 0; i < per_epoch; ++i) {
      uint64_t v = g.next().values[0];
      (e < 2 ? before : after)[v]++;
    }
  auto argmax = [](const std::unordered_map<uint64_t, uint64_t>& m) {
    uint64_t bk = 0, bc = 0;
    for (const auto& [k, c] : m)
      if (c > bc || (c == bc && k < bk)) { bk = k; bc = c; }
    return bk;
  };
  CHECK(argmax(before) == 0);
  CHECK(argmax(after) == 137);
}

TEST_CASE("concentration drift strictly decreases exact entropy per epoch") {
  DimSchedule d = lognormal_dim(7.0, 0.6);
  d.drift = DriftKind::Concentration;
  d.rate = 0.93;
  WorkloadSchedule ws;
  ws.dims = {d};
  ws.seed = 12;
  const int per_epoch = 10000;
  WorkloadGen g(ws, per_epoch, 1);
  double prev = 1e9;
  for (int e = 0; e < 30; ++e) {
    std::vector<uint64_t> vals;
    vals.reserve(per_epoch);
    for (int i = 0; i < per_epoch; ++i) vals.push_back(g.next().values[0]);
    double h = exact_entropy_bits(vals);
    CHECK(h < prev);
    prev = h;
  }
}

TEST_CASE("zipf concentration sharpens the exponent") {
  DimSchedule d = zipf_dim(2000, 1.0);
  d.drift = DriftKind::Concentration;
  d.rate = 0.05;
  WorkloadSchedule ws;
  ws.dims = {d};
  ws.seed = 21;
  const int per_epoch = 10000;
  WorkloadGen g(ws, per_epoch, 1);
  std::vector<uint64_t> e0, e20;
  for (int e = 0; e <= 20; ++e)
    for (int i = 0; i < per_epoch; ++i) {
      uint64_t v = g.next().values[0];
      if (e == 0) e0.push_back(v);
      if (e == 20) e20.push_back(v);
    }
  CHECK(exact_entropy_bits(e20) < exact_entropy_bits(e0) - 1.0);
}

TEST_CASE("schedule validation") {
  WorkloadSchedule empty;
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);

  DimSchedule bad_zipf = zipf_dim(1, 1.0);
  CHECK_THROWS_AS(bad_zipf.validate(), std::invalid_argument);

  DimSchedule bad_ln = lognormal_dim(7.0, 0.0);
  CHECK_THROWS_AS(bad_ln.validate(), std::invalid_argument);

  DimSchedule bad_conc = lognormal_dim(7.0, 0.5);
  bad_conc.drift = DriftKind::Concentration;
  bad_conc.rate = 1.5;
  CHECK_THROWS_AS(bad_conc.validate(), std::invalid_argument);

  WorkloadSchedule ws;
  ws.dims = {zipf_dim(100, 1.0)};
  CHECK_THROWS_AS(WorkloadGen(ws, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(WorkloadGen(ws, 10, 0), std::invalid_argument);
}

TEST_CASE("histogram config matches the quantization grid") {
  auto z = zipf_dim(5000, 1.1).histogram_config(256);
  CHECK(z.min == 0);
  CHECK(z.max == 5000);
  CHECK(z.buckets == 256);
  auto l = lognormal_dim(7, 0.5).histogram_config(128);
  CHECK(l.max == 65536);
  CHECK(l.buckets == 128);
}
