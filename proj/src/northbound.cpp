#include "sketchloop/northbound.hpp"

#include <algorithm>
#include <stdexcept>

namespace sketchloop {

const char* timing_name(Timing t) {
  return t == Timing::Tight ? "tight" : "loose";
}

Timing timing_from_name(const std::string& name) {
  if (name == "tight") return Timing::Tight;
  if (name == "loose") return Timing::Loose;
  throw std::invalid_argument("unknown timing class: " + name);
}

EstimateBuffer::EstimateBuffer(size_t capacity) : ring_(capacity) {
  if (capacity == 0) throw std::invalid_argument("buffer capacity must be >= 1");
}

bool EstimateBuffer::append(Delivery d) {
  bool overwrote = size_ == ring_.size();
  ring_[head_] = std::move(d);
  head_ = (head_ + 1) % ring_.size();
  if (overwrote) ++overwrites_;
  else ++size_;
  return overwrote;
}

const Delivery& EstimateBuffer::newest() const {
  if (size_ == 0) throw std::logic_error("empty estimate buffer");
  return ring_[(head_ + ring_.size() - 1) % ring_.size()];
}

std::vector<const Delivery*> EstimateBuffer::chronological() const {
  std::vector<const Delivery*> out;
  out.reserve(size_);
  size_t start = (head_ + ring_.size() - size_) % ring_.size();
  for (size_t i = 0; i < size_; ++i) out.push_back(&ring_[(start + i) % ring_.size()]);
  return out;
}

NorthboundApi::NorthboundApi(std::vector<std::string> dimension_names)
    : dim_names_(std::move(dimension_names)) {
  if (dim_names_.empty())
    throw std::invalid_argument("dimension table must not be empty");
}

Subscription& NorthboundApi::set_attributes(
    const std::vector<AttributeSpec>& attributes,
    const std::vector<MetricKind>& estimates, Timing timing, uint64_t reuse_id) {
  if (attributes.empty()) throw std::invalid_argument("attribute list is empty");
  if (attributes.size() > dim_names_.size())
    throw std::length_error("attribute list exceeds the configured dimension capacity");
  if (estimates.empty()) throw std::invalid_argument("estimate list is empty");
  for (MetricKind m : estimates) {
    if (static_cast<uint8_t>(m) > static_cast<uint8_t>(MetricKind::KeyHistogram))
      throw std::invalid_argument("unknown metric kind");
  }

  std::vector<AttributeSpec> resolved;
  resolved.reserve(attributes.size());
  for (const AttributeSpec& a : attributes) {
    auto it = std::find(dim_names_.begin(), dim_names_.end(), a.name);
    if (it == dim_names_.end())
      throw std::invalid_argument("unknown dimension name: " + a.name);
    if (!(a.domain_min < a.domain_max))
      throw std::invalid_argument("degenerate value domain for " + a.name);
    AttributeSpec spec = a;
    spec.dimension = static_cast<uint32_t>(it - dim_names_.begin());
    spec.metrics = estimates;
    spec.timing = timing;
    for (const AttributeSpec& seen : resolved)
      if (seen.dimension == spec.dimension)
        throw std::invalid_argument("duplicate attribute: " + a.name);
    resolved.push_back(std::move(spec));
  }

  if (reuse_id != 0) {
    auto it = subs_.find(reuse_id);
    if (it == subs_.end())
      throw std::invalid_argument("no subscription with the given id");
    it->second.attributes = std::move(resolved);
    it->second.timing = timing;
    return it->second;
  }

  Subscription sub;
  sub.id = next_id_++;
  sub.attributes = std::move(resolved);
  sub.timing = timing;
  auto [it, inserted] = subs_.emplace(sub.id, std::move(sub));
  return it->second;
}

void NorthboundApi::get_estimates(uint64_t subscription_id, size_t buffer_capacity,
                                  EstimateCallback callback) {
  auto it = subs_.find(subscription_id);
  if (it == subs_.end())
    throw std::invalid_argument("no subscription with the given id");
  if (!callback) throw std::invalid_argument("callback must not be empty");
  it->second.buffer.emplace(buffer_capacity);
  it->second.callback = std::move(callback);
}

void NorthboundApi::deliver_local(const EstimateSet& set, uint64_t now_epoch) {
  if (set.scope != Scope::Local)
    throw std::logic_error("deliver_local requires a local-scope set");
  deliver(set, now_epoch, Timing::Tight);
}

void NorthboundApi::deliver_global(const EstimateSet& set, uint64_t now_epoch) {
  if (set.scope != Scope::Global)
    throw std::logic_error("deliver_global requires a global-scope set");
  deliver(set, now_epoch, Timing::Loose);
}

void NorthboundApi::deliver(const EstimateSet& set, uint64_t now_epoch,
                            Timing want) {
  for (auto& [id, sub] : subs_) {
    if (sub.timing != want || !sub.buffer) continue;
    Delivery d;
    d.set = project(sub, set);
    d.delivered_epoch = now_epoch;
    d.staleness = now_epoch >= set.epoch ? now_epoch - set.epoch : 0;
    sub.buffer->append(std::move(d));
    ++sub.callbacks_fired;
    sub.callback(id, sub.buffer->newest());
  }
}

EstimateSet NorthboundApi::project(const Subscription& sub,
                                   const EstimateSet& set) const {
  EstimateSet out;
  out.scope = set.scope;
  out.source = set.source;
  out.epoch = set.epoch;
  out.produced_at = set.produced_at;
  out.sync_round = set.sync_round;
  out.degraded = set.degraded;
  out.stale_members = set.stale_members;

  const std::vector<MetricKind>& metrics = sub.attributes.front().metrics;
  auto wants = [&](MetricKind m) {
    return std::find(metrics.begin(), metrics.end(), m) != metrics.end();
  };
  for (const EstimateEntry& e : set.entries) {
    if (!wants(e.metric)) continue;
    if (e.dimension == kTableDim) {  // whole-table change score
      out.entries.push_back(e);
      continue;
    }
    for (const AttributeSpec& a : sub.attributes) {
      if (a.dimension == e.dimension) {
        out.entries.push_back(e);
        break;
      }
    }
  }
  return out;
}

const Subscription& NorthboundApi::subscription(uint64_t id) const {
  auto it = subs_.find(id);
  if (it == subs_.end())
    throw std::invalid_argument("no subscription with the given id");
  return it->second;
}

std::vector<uint64_t> NorthboundApi::subscription_ids() const {
  std::vector<uint64_t> out;
  out.reserve(subs_.size());
  for (const auto& [id, sub] : subs_) out.push_back(id);
  return out;
}

uint64_t NorthboundApi::active_dim_mask() const {
  uint64_t mask = 0;
  for (const auto& [id, sub] : subs_)
    for (const AttributeSpec& a : sub.attributes) mask |= uint64_t{1} << a.dimension;
  return mask;
}

}  // namespace sketchloop
