#include "sketchloop/dataplane.hpp"

#include <span>
#include <stdexcept>

namespace sketchloop {

SwitchDataPlane::SwitchDataPlane(uint32_t switch_id, const SketchGeometry& geom,
                                 double sampling_p, uint64_t sampling_seed,
                                 const std::vector<HistogramConfig>& hist_cfgs,
                                 uint64_t epoch_len)
    : switch_id_(switch_id),
      geom_(geom),
      sampling_p_(sampling_p),
      sampling_seed_(sampling_seed),
      epoch_len_(epoch_len),
      active_mask_(geom.dimensions >= 64 ? ~0ULL : (1ULL << geom.dimensions) - 1),
      active_(geom, sampling_p, sampling_seed) {
  if (hist_cfgs.size() != geom.dimensions)
    throw std::invalid_argument("need one histogram config per dimension");
  hists_.reserve(hist_cfgs.size());
  for (const auto& cfg : hist_cfgs) hists_.emplace_back(cfg);
}

void SwitchDataPlane::observe(const Record& r) {
  ++packets_;
  if (epoch_len_ != 0 && r.timestamp / epoch_len_ != epoch_)
    throw std::logic_error("record timestamp outside the current epoch");
  if (r.values.size() != geom_.dimensions) {
    ++drops_;  // malformed record: a configured dimension is missing
    return;
  }
  if (active_mask_ == 0) return;
  active_.update_record(std::span<const uint64_t>(r.values.data(), r.values.size()),
                        1, active_mask_);
  for (uint32_t d = 0; d < geom_.dimensions; ++d)
    if (active_mask_ >> d & 1)
      hists_[d].add(static_cast<double>(r.values[d]));
}

EpochSnapshot SwitchDataPlane::rotate_epoch() {
  EpochSnapshot snap{switch_id_, epoch_, active_, hists_};
  prev_ = snap;
  active_ = MergedUnivSketch(geom_, sampling_p_, sampling_seed_);
  for (auto& h : hists_) h.clear();
  ++epoch_;
  return snap;
}

}  // namespace sketchloop
