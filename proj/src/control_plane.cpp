#include "sketchloop/control_plane.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "sketchloop/gsum.hpp"
#include "sketchloop/wire.hpp"

namespace sketchloop {

EstimateSet compute_estimates(const MergedUnivSketch& sk,
                              const std::vector<DimHistogram>& hists,
                              const MergedUnivSketch* prev, Scope scope,
                              uint32_t source, uint64_t epoch,
                              uint64_t produced_at, uint64_t sync_round,
                              double hh_threshold) {
  const SketchGeometry& g = sk.geometry();
  if (hists.size() != g.dimensions)
    throw std::invalid_argument("need one histogram per dimension");

  EstimateSet out;
  out.scope = scope;
  out.source = source;
  out.epoch = epoch;
  out.produced_at = produced_at;
  out.sync_round = sync_round;

  for (uint32_t d = 0; d < g.dimensions; ++d) {
    EstimateEntry ent;
    ent.dimension = d;
    ent.metric = MetricKind::Entropy;
    if (sk.stream_length(d) == 0) ent.absent_reason = "empty-dimension";
    else ent.scalar = sk.entropy_bits(d);
    out.entries.push_back(std::move(ent));

    EstimateEntry card;
    card.dimension = d;
    card.metric = MetricKind::Cardinality;
    card.scalar = sk.stream_length(d) == 0
                      ? 0.0
                      : sk.gsum(d, GsumKind::cardinality());
    out.entries.push_back(std::move(card));

    EstimateEntry hh;
    hh.dimension = d;
    hh.metric = MetricKind::HeavyHitters;
    hh.hh = sk.heavy_hitters(d, hh_threshold);
    out.entries.push_back(std::move(hh));

    EstimateEntry q;
    q.dimension = d;
    q.metric = MetricKind::Quantiles;
    if (hists[d].total() == 0) {
      q.absent_reason = "empty-histogram";
    } else {
      for (double p : kQuantilePoints) q.quantiles.emplace_back(p, hists[d].quantile(p));
    }
    out.entries.push_back(std::move(q));

    EstimateEntry kh;
    kh.dimension = d;
    kh.metric = MetricKind::KeyHistogram;
    kh.histogram = hists[d];
    out.entries.push_back(std::move(kh));
  }

  EstimateEntry chg;
  chg.dimension = kTableDim;
  chg.metric = MetricKind::ChangeScore;
  if (prev == nullptr) chg.absent_reason = "no-previous-epoch";
  else chg.scalar = MergedUnivSketch::diff_l2(sk, *prev);
  out.entries.push_back(std::move(chg));

  return out;
}

namespace {
constexpr char kSyncMagic[4] = {'N', 'S', 'Y', 'N'};
}

std::vector<uint8_t> encode_sync(const SyncMessage& msg) {
  ByteWriter w;
  w.bytes(kSyncMagic, 4);
  w.u64(msg.round);
  w.u8(static_cast<uint8_t>(msg.kind));
  w.u32(msg.sender);
  w.u64(msg.payload.size());
  w.bytes(msg.payload.data(), msg.payload.size());
  return w.take();
}

SyncMessage decode_sync(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kSyncMagic, 4) != 0)
    throw std::runtime_error("not an NSYN frame (bad magic)");
  SyncMessage msg;
  msg.round = r.u64();
  uint8_t kind = r.u8();
  if (kind > 1) throw std::runtime_error("unknown NSYN message kind");
  msg.kind = static_cast<SyncKind>(kind);
  msg.sender = r.u32();
  uint64_t len = r.u64();
  if (len != r.remaining()) throw std::runtime_error("NSYN payload length mismatch");
  msg.payload.resize(len);
  r.raw(msg.payload.data(), len);
  return msg;
}

LocalController::LocalController(uint32_t switch_id, double hh_threshold)
    : switch_id_(switch_id), hh_threshold_(hh_threshold) {}

const EstimateSet& LocalController::local_compute(const EpochSnapshot& snap,
                                                  uint64_t now) {
  if (static_cast<int64_t>(snap.epoch) <= last_epoch_)
    throw std::invalid_argument("stale snapshot: epoch already processed");
  const MergedUnivSketch* prev = prev_sketch_ ? &*prev_sketch_ : nullptr;
  local_ = compute_estimates(snap.sketch, snap.histograms, prev, Scope::Local,
                             switch_id_, snap.epoch, now, 0, hh_threshold_);
  last_epoch_ = static_cast<int64_t>(snap.epoch);
  prev_sketch_ = snap.sketch;
  latest_snapshot_ = snap;
  return *local_;
}

SyncMessage LocalController::make_upload(uint64_t round) const {
  if (!latest_snapshot_)
    throw std::logic_error("no snapshot to upload before the first local_compute");
  SyncMessage msg;
  msg.round = round;
  msg.kind = SyncKind::SnapshotUpload;
  msg.sender = switch_id_;
  msg.payload = serialize_snapshot(*latest_snapshot_);
  return msg;
}

bool LocalController::receive_global(const SyncMessage& download, uint64_t now) {
  if (download.kind != SyncKind::GlobalEstimateDownload)
    throw std::invalid_argument("expected a GlobalEstimateDownload");
  if (global_ && download.round <= global_->sync_round) return false;
  EstimateSet set = deserialize_estimates(download.payload);
  (void)now;
  global_ = std::move(set);
  return true;
}

std::optional<FreshnessResult> LocalController::freshness(Scope want,
                                                          uint64_t now) const {
  const std::optional<EstimateSet>& held = want == Scope::Local ? local_ : global_;
  if (!held) return std::nullopt;
  uint64_t age = now >= held->produced_at ? now - held->produced_at : 0;
  return FreshnessResult{&*held, age};
}

CentralController::CentralController(double hh_threshold)
    : hh_threshold_(hh_threshold) {}

void CentralController::register_local(uint32_t switch_id) {
  if (std::find(members_.begin(), members_.end(), switch_id) != members_.end())
    throw std::invalid_argument("local controller already registered");
  members_.push_back(switch_id);
}

CentralController::SyncResult CentralController::sync_round(
    uint64_t round, const std::vector<SyncMessage>& uploads, uint64_t now) {
  if (members_.empty()) throw std::logic_error("no registered local controllers");
  if (static_cast<int64_t>(round) <= last_round_)
    throw std::invalid_argument("sync rounds must strictly increase");

  std::vector<uint32_t> fresh;
  for (const auto& msg : uploads) {
    if (msg.kind != SyncKind::SnapshotUpload)
      throw std::invalid_argument("sync_round accepts only SnapshotUpload messages");
    if (msg.round != round)
      throw std::invalid_argument("upload carries a different sync round");
    if (std::find(members_.begin(), members_.end(), msg.sender) == members_.end())
      throw std::invalid_argument("upload from an unregistered sender");
    EpochSnapshot snap = deserialize_snapshot(msg.payload);
    if (snap.switch_id != msg.sender)
      throw std::invalid_argument("snapshot switch id does not match sender");
    fresh.push_back(msg.sender);
    last_snapshot_.insert_or_assign(msg.sender, std::move(snap));
  }

  std::vector<uint32_t> stale;
  for (uint32_t m : members_)
    if (std::find(fresh.begin(), fresh.end(), m) == fresh.end()) stale.push_back(m);

  std::optional<MergedUnivSketch> merged;
  std::vector<DimHistogram> hists;
  uint64_t epoch = 0;
  for (const auto& [id, snap] : last_snapshot_) {
    if (!merged) {
      merged = snap.sketch;
      hists = snap.histograms;
    } else {
      merged->merge(snap.sketch);
      for (size_t i = 0; i < hists.size(); ++i) hists[i].merge(snap.histograms[i]);
    }
    epoch = std::max(epoch, snap.epoch);
  }
  if (!merged)
    throw std::invalid_argument("sync round with no snapshot ever received");

  const MergedUnivSketch* prev = merged_ ? &*merged_ : nullptr;
  EstimateSet global =
      compute_estimates(*merged, hists, prev, Scope::Global, kCentralSource,
                        epoch, now, round, hh_threshold_);
  global.degraded = !stale.empty();
  global.stale_members = stale;

  merged_ = std::move(merged);
  merged_hists_ = std::move(hists);
  global_ = global;
  last_round_ = static_cast<int64_t>(round);
  ++rounds_completed_;

  SyncResult result;
  result.downloads.reserve(members_.size());
  auto payload = serialize_estimates(global);
  for (size_t i = 0; i < members_.size(); ++i) {
    SyncMessage d;
    d.round = round;
    d.kind = SyncKind::GlobalEstimateDownload;
    d.sender = kCentralSource;
    d.payload = payload;
    result.downloads.push_back(std::move(d));
  }
  result.global = std::move(global);
  return result;
}

}  // namespace sketchloop
