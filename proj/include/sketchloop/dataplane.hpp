#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sketchloop/snapshot.hpp"
#include "sketchloop/workload.hpp"

namespace sketchloop {

// One simulated switch data plane: the active merged sketch plus per-dim
// histograms for the current epoch. Single-writer; the simulator drives it
// from one logical clock. Every routed record lands in the active sketch
// exactly once; closed snapshots are never touched again.
class SwitchDataPlane {
 public:
  // epoch_len is in simulated time units (records); 0 disables the
  // timestamp-within-epoch check for tests that drive rotation manually.
  SwitchDataPlane(uint32_t switch_id, const SketchGeometry& geom,
                  double sampling_p, uint64_t sampling_seed,
                  const std::vector<HistogramConfig>& hist_cfgs,
                  uint64_t epoch_len);

  void observe(const Record& r);

  // Closes the current epoch: returns its snapshot, keeps a copy as the
  // previous-epoch snapshot, and installs a fresh zeroed sketch with the
  // same geometry and seed (one sketch seed per run keeps snapshots
  // mergeable across switches and diffable across epochs).
  EpochSnapshot rotate_epoch();

  // Restrict observation to a subset of dimensions (northbound
  // reconfiguration). Bit d of the mask enables dimension d.
  void set_active_dims(uint64_t mask) { active_mask_ = mask; }
  uint64_t active_dims() const { return active_mask_; }

  uint32_t switch_id() const { return switch_id_; }
  uint64_t epoch() const { return epoch_; }
  uint64_t packets() const { return packets_; }
  uint64_t drops() const { return drops_; }
  const MergedUnivSketch& active() const { return active_; }
  const std::vector<DimHistogram>& histograms() const { return hists_; }
  const std::optional<EpochSnapshot>& previous() const { return prev_; }

 private:
  uint32_t switch_id_;
  SketchGeometry geom_;
  double sampling_p_;
  uint64_t sampling_seed_;
  uint64_t epoch_len_;
  uint64_t active_mask_;
  MergedUnivSketch active_;
  std::vector<DimHistogram> hists_;
  std::optional<EpochSnapshot> prev_;
  uint64_t epoch_ = 0;
  uint64_t packets_ = 0;
  uint64_t drops_ = 0;
};

}  // namespace sketchloop
