#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sketchloop/merged_sketch.hpp"

namespace sketchloop {

// One sampling-rate arm of the microbenchmark: the full stream pushed
// through one sketch at rate p, with instrumented costs and the estimate
// error measured against exact counts.
struct BenchArm {
  double p = 1.0;
  uint64_t memory_bytes = 0;
  SketchStats stats;
  double rel_are = 0.0;  // mean relative error over the exact top keys
  double abs_err = 0.0;  // mean absolute error over the exact top keys
};

struct BenchReport {
  uint64_t seed = 0;

  // sampling arms, p = 1 / 0.5 / 0.1 over one zipf stream
  std::vector<BenchArm> arms;
  double hash_ratio = 0.0;      // arm p=0.1 vs p=1, all hash evals
  double row_hash_ratio = 0.0;  // arm p=0.1 vs p=1, row hashes only
  double rel_are_ratio = 0.0;
  double abs_err_ratio = 0.0;

  // repeated-sampling bias probe: sampling seed varied, tables fixed
  uint32_t unbias_runs = 0;
  double unbias_worst_dev = 0.0;  // worst |mean estimate - truth| / truth

  // merged vs per-dimension sketches at equal total memory, skewed mix;
  // error is the mean |estimate - truth| over each dimension's exact top
  // keys, averaged across dimensions weighted by traffic share
  std::vector<double> mix_shares;
  double merged_err = 0.0;
  double separate_err = 0.0;
  std::vector<double> merged_dim_err;    // per-dimension means, unweighted
  std::vector<double> separate_dim_err;
  uint64_t merged_memory = 0;
  uint64_t separate_memory = 0;
  SketchStats merged_stats;
  SketchStats separate_stats;

  // degenerate D=1 equivalence: identical geometry, identical seed
  double d1_merged_err = 0.0;
  double d1_separate_err = 0.0;
};

// Runs every arm on built-in stream specs (documented in the report text).
// Deterministic in `seed`.
BenchReport run_sketch_bench(uint64_t seed);

void write_bench_report(const BenchReport& r, std::ostream& out);

// Counter plus tracker footprint of one sketch with this geometry.
uint64_t sketch_memory_bytes(const SketchGeometry& g);

}  // namespace sketchloop
