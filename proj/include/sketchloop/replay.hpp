#pragma once

#include <iosfwd>
#include <string>

#include "sketchloop/config.hpp"

namespace sketchloop {

// Drives the full closed loop on the configured workload and writes the
// experiment trace: per record observe/route/cache-lookup, per epoch
// rotate -> local_compute -> Tight delivery, per sync round upload ->
// central merge -> Loose delivery -> reshard / cache refresh. A trailing
// partial epoch (records not divisible by the epoch size) is generated but
// never closed, so it produces no rows.
void run_simulate(const RunConfig& cfg, std::ostream& trace_out);

// Replays the identical generated stream with exact hash-map counting per
// switch (and globally at sync epochs) and writes the same trace schema, so
// simulate and oracle traces diff row by row. Sketch-side service state
// (imbalance, cache hit rates, reshard events) has no exact counterpart and
// is not emitted; the oracle instead emits the exact per-dimension change
// L2 and the clairvoyant per-epoch cache ceiling.
void run_oracle(const RunConfig& cfg, std::ostream& trace_out);

// Resolved-config echo written next to each trace. Deliberately excludes
// the output directory and any timestamps: identical (config, seed,
// command) must produce byte-identical manifests.
std::string manifest_json(const RunConfig& cfg, const std::string& command);

// Dimensions the data planes observe: the union of subscription and service
// dimensions, or every dimension when nothing is configured. The oracle
// applies the same mask.
uint64_t configured_dim_mask(const RunConfig& cfg);

}  // namespace sketchloop
