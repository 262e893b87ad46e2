#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sketchloop/estimates.hpp"

namespace sketchloop {

// Tight subscriptions are replicated at every local controller and receive
// local-scope sets each epoch; Loose subscriptions live at the central
// controller and receive only global sets, once per sync round.
enum class Timing : uint8_t { Tight = 0, Loose = 1 };

const char* timing_name(Timing t);
Timing timing_from_name(const std::string& name);

struct AttributeSpec {
  std::string name;      // dimension name from the configured dimension table
  uint32_t dimension = 0;  // resolved index
  double domain_min = 0.0;
  double domain_max = 0.0;  // value domain [domain_min, domain_max)
  std::vector<MetricKind> metrics;
  Timing timing = Timing::Loose;
};

// One delivered estimate set. Staleness is measured in epochs: the delivery
// epoch minus the newest epoch whose data the set covers.
struct Delivery {
  EstimateSet set;
  uint64_t delivered_epoch = 0;
  uint64_t staleness = 0;
};

// Bounded ring. Appends never block: once full, the oldest entry is
// overwritten and counted, so a slow consumer loses history but never
// stalls a producer.
class EstimateBuffer {
 public:
  explicit EstimateBuffer(size_t capacity);

  // Returns whether an old entry was overwritten.
  bool append(Delivery d);

  size_t size() const { return size_; }
  size_t capacity() const { return ring_.size(); }
  uint64_t overwrites() const { return overwrites_; }
  const Delivery& newest() const;

  // Oldest to newest.
  std::vector<const Delivery*> chronological() const;

 private:
  std::vector<Delivery> ring_;
  size_t head_ = 0;  // next write position
  size_t size_ = 0;
  uint64_t overwrites_ = 0;
};

using EstimateCallback = std::function<void(uint64_t subscription_id, const Delivery&)>;

struct Subscription {
  uint64_t id = 0;
  std::vector<AttributeSpec> attributes;
  Timing timing = Timing::Loose;
  std::optional<EstimateBuffer> buffer;  // attached by get_estimates
  EstimateCallback callback;
  uint64_t callbacks_fired = 0;
};

// Service-facing registration and delivery layer. Sits between the
// controllers and the acceleration services: the replay harness pushes every
// freshly computed EstimateSet through deliver_local / deliver_global and
// the api fans it out to matching subscriptions, projected down to each
// subscription's dimensions and metrics.
class NorthboundApi {
 public:
  // The dimension table fixes the capacity D; attribute names resolve
  // against it.
  explicit NorthboundApi(std::vector<std::string> dimension_names);

  // Creates a subscription, or reconfigures the one named by reuse_id in
  // place (its buffer, callback, and counters survive; subsequent
  // deliveries carry exactly the new metric set). The metric list and
  // timing apply to every attribute in the call.
  // Throws std::length_error when the attribute list exceeds the dimension
  // capacity, std::invalid_argument for unknown names or metric kinds,
  // duplicate attributes, empty lists, or degenerate domains.
  Subscription& set_attributes(const std::vector<AttributeSpec>& attributes,
                               const std::vector<MetricKind>& estimates,
                               Timing timing, uint64_t reuse_id = 0);

  // Attaches the subscription's buffer and callback. Re-calling replaces
  // both and drops buffered history.
  void get_estimates(uint64_t subscription_id, size_t buffer_capacity,
                     EstimateCallback callback);

  // Fan-out entry points. Each matching subscription gets one append and
  // exactly one callback, invoked after the append is visible in the
  // buffer. now_epoch is the delivery epoch used for staleness.
  void deliver_local(const EstimateSet& set, uint64_t now_epoch);
  void deliver_global(const EstimateSet& set, uint64_t now_epoch);

  const Subscription& subscription(uint64_t id) const;
  size_t subscription_count() const { return subs_.size(); }
  std::vector<uint64_t> subscription_ids() const;

  // Union of all subscribed dimension indices, as a data-plane mask.
  uint64_t active_dim_mask() const;

  const std::vector<std::string>& dimension_names() const { return dim_names_; }

 private:
  void deliver(const EstimateSet& set, uint64_t now_epoch, Timing want);
  EstimateSet project(const Subscription& sub, const EstimateSet& set) const;

  std::vector<std::string> dim_names_;
  std::map<uint64_t, Subscription> subs_;  // ordered for deterministic fan-out
  uint64_t next_id_ = 1;
};

}  // namespace sketchloop
