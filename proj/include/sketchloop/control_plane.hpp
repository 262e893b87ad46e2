#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "sketchloop/estimates.hpp"
#include "sketchloop/snapshot.hpp"

namespace sketchloop {

// Computes the full metric family from one snapshot: per dimension entropy,
// cardinality, heavy hitters, quantiles, and key histogram, plus one
// whole-table change score against the previous snapshot's sketch (absent
// with reason "no-previous-epoch" when there is none). Local and central
// controllers share this path, so a single-member hierarchy produces a
// global set with exactly the local set's values.
EstimateSet compute_estimates(const MergedUnivSketch& sk,
                              const std::vector<DimHistogram>& hists,
                              const MergedUnivSketch* prev, Scope scope,
                              uint32_t source, uint64_t epoch,
                              uint64_t produced_at, uint64_t sync_round,
                              double hh_threshold);

enum class SyncKind : uint8_t { SnapshotUpload = 0, GlobalEstimateDownload = 1 };

struct SyncMessage {
  uint64_t round = 0;
  SyncKind kind = SyncKind::SnapshotUpload;
  uint32_t sender = 0;
  std::vector<uint8_t> payload;

  bool operator==(const SyncMessage&) const = default;
};

// NSYN wire framing: magic "NSYN", round u64, kind u8, sender u32,
// payload length u64, payload bytes.
std::vector<uint8_t> encode_sync(const SyncMessage& msg);
SyncMessage decode_sync(std::span<const uint8_t> bytes);

struct FreshnessResult {
  const EstimateSet* set;
  uint64_t staleness;  // simulated time since the set was produced
};

// Per-switch controller: computes fresh local estimates from each closed
// epoch's snapshot and holds the latest global set downloaded from the
// central controller. The global set it holds is always one the central
// produced; rounds are monotone, so a stale download never overwrites a
// newer one.
class LocalController {
 public:
  LocalController(uint32_t switch_id, double hh_threshold);

  // Rejects snapshots at or before the last processed epoch.
  const EstimateSet& local_compute(const EpochSnapshot& snap, uint64_t now);

  // Serialized latest snapshot, framed for upload. Requires at least one
  // local_compute.
  SyncMessage make_upload(uint64_t round) const;

  // Stores the download's estimate set unless an equal-or-newer round is
  // already held. Returns whether the set was installed.
  bool receive_global(const SyncMessage& download, uint64_t now);

  std::optional<FreshnessResult> freshness(Scope want, uint64_t now) const;

  uint32_t switch_id() const { return switch_id_; }
  const EstimateSet* latest_local() const {
    return local_ ? &*local_ : nullptr;
  }
  const EstimateSet* latest_global() const {
    return global_ ? &*global_ : nullptr;
  }
  int64_t last_epoch() const { return last_epoch_; }

 private:
  uint32_t switch_id_;
  double hh_threshold_;
  int64_t last_epoch_ = -1;
  std::optional<EstimateSet> local_;
  std::optional<EstimateSet> global_;
  std::optional<EpochSnapshot> latest_snapshot_;
  std::optional<MergedUnivSketch> prev_sketch_;
};

// Aggregation point of the hierarchy: merges the member snapshots of each
// sync round into one global sketch and computes global metrics from the
// merged sketch (merging snapshots preserves the estimator guarantees;
// averaging per-member estimates would not). Members missing from a round
// contribute their last known snapshot and the round is flagged degraded.
class CentralController {
 public:
  explicit CentralController(double hh_threshold);

  void register_local(uint32_t switch_id);

  struct SyncResult {
    EstimateSet global;
    std::vector<SyncMessage> downloads;  // one per registered member
  };

  SyncResult sync_round(uint64_t round, const std::vector<SyncMessage>& uploads,
                        uint64_t now);

  const EstimateSet* latest_global() const {
    return global_ ? &*global_ : nullptr;
  }
  const MergedUnivSketch* merged_sketch() const {
    return merged_ ? &*merged_ : nullptr;
  }
  const std::vector<DimHistogram>& merged_histograms() const {
    return merged_hists_;
  }
  uint64_t rounds_completed() const { return rounds_completed_; }

 private:
  double hh_threshold_;
  std::vector<uint32_t> members_;
  std::map<uint32_t, EpochSnapshot> last_snapshot_;  // ordered for determinism
  std::optional<MergedUnivSketch> merged_;
  std::vector<DimHistogram> merged_hists_;
  std::optional<EstimateSet> global_;
  uint64_t rounds_completed_ = 0;
  int64_t last_round_ = -1;
};

}  // namespace sketchloop
