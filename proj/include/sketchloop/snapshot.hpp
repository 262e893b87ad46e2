#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sketchloop/histogram.hpp"
#include "sketchloop/merged_sketch.hpp"

namespace sketchloop {

// Closed-epoch state handed from a data plane to its local controller and,
// through sync, to the central controller. Immutable once produced. No
// default constructor: a snapshot only exists as the result of an epoch
// rotation or a deserialization.
struct EpochSnapshot {
  uint32_t switch_id;
  uint64_t epoch;
  MergedUnivSketch sketch;
  std::vector<DimHistogram> histograms;
};

// NSKT binary snapshot layout, version 1, little-endian:
//   magic "NSKT", version u32,
//   geometry (depth, width, levels, dimensions, track_k as u32; seed u64),
//   per-level counter blocks (depth*width i64 cells, overflow u8),
//   per-dimension m counters (u64 each),
//   tracker dumps, dimension-major (count u32, then (key u64, estimate i64)
//   pairs in canonical order: estimate desc, key asc),
//   histogram blocks (count u32; per block: min f64, max f64, buckets u32,
//   scale u8, clamp_low u64, clamp_high u64, total u64, bucket counts u64).
// Tracker entries are re-estimated against the serialized tables before
// writing, so the encoding of a given sketch state is unique and
// serialize(deserialize(bytes)) == bytes.
std::vector<uint8_t> serialize_sketch(const MergedUnivSketch& sk,
                                      const std::vector<DimHistogram>& histograms);
MergedUnivSketch deserialize_sketch(std::span<const uint8_t> bytes,
                                    std::vector<DimHistogram>& histograms_out);

// EpochSnapshot framing: switch id u32, epoch u64, then the NSKT block.
std::vector<uint8_t> serialize_snapshot(const EpochSnapshot& snap);
EpochSnapshot deserialize_snapshot(std::span<const uint8_t> bytes);

}  // namespace sketchloop
