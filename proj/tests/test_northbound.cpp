#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <string>
#include <vector>

#include "doctest.h"
#include "sketchloop/northbound.hpp"

using namespace sketchloop;

namespace {

EstimateSet make_set(Scope scope, uint32_t source, uint64_t epoch,
                     uint64_t sync_round = 0) {
  EstimateSet s;
  s.scope = scope;
  s.source = source;
  s.epoch = epoch;
  s.produced_at = epoch * 1000;
  s.sync_round = sync_round;
  for (uint32_t d = 0; d < 2; ++d) {
    for (MetricKind m : {MetricKind::Entropy, MetricKind::Cardinality,
                         MetricKind::HeavyHitters}) {
      EstimateEntry e;
      e.dimension = d;
      e.metric = m;
      e.scalar = 10.0 * d + static_cast<double>(m);
      s.entries.push_back(e);
    }
  }
  EstimateEntry chg;
  chg.dimension = kTableDim;
  chg.metric = MetricKind::ChangeScore;
  chg.scalar = 3.5;
  s.entries.push_back(chg);
  return s;
}

AttributeSpec attr(const std::string& name, double lo = 0, double hi = 100) {
  AttributeSpec a;
  a.name = name;
  a.domain_min = lo;
  a.domain_max = hi;
  return a;
}

NorthboundApi make_api() { return NorthboundApi({"energy", "rank", "tag"}); }

}  // namespace

TEST_CASE("set_attributes validates its inputs") {
  auto api = make_api();
  auto noop = [](uint64_t, const Delivery&) {};

  CHECK_THROWS_AS(api.set_attributes({}, {MetricKind::Entropy}, Timing::Loose),
                  std::invalid_argument);
  CHECK_THROWS_AS(api.set_attributes({attr("energy")}, {}, Timing::Loose),
                  std::invalid_argument);
  CHECK_THROWS_AS(api.set_attributes({attr("energy")},
                                     {static_cast<MetricKind>(99)}, Timing::Loose),
                  std::invalid_argument);
  CHECK_THROWS_AS(api.set_attributes({attr("voltage")}, {MetricKind::Entropy},
                                     Timing::Loose),
                  std::invalid_argument);
  CHECK_THROWS_AS(api.set_attributes({attr("energy", 5, 5)}, {MetricKind::Entropy},
                                     Timing::Loose),
                  std::invalid_argument);
  CHECK_THROWS_AS(api.set_attributes({attr("energy"), attr("energy")},
                                     {MetricKind::Entropy}, Timing::Loose),
                  std::invalid_argument);
  // four attributes against a three-dimension table: capacity error
  CHECK_THROWS_AS(api.set_attributes({attr("energy"), attr("rank"), attr("tag"),
                                      attr("energy")},
                                     {MetricKind::Entropy}, Timing::Loose),
                  std::length_error);
  CHECK(api.subscription_count() == 0);

  auto& sub = api.set_attributes({attr("rank")}, {MetricKind::Entropy}, Timing::Tight);
  CHECK(sub.attributes[0].dimension == 1);
  CHECK(sub.attributes[0].metrics == std::vector<MetricKind>{MetricKind::Entropy});
  CHECK(sub.attributes[0].timing == Timing::Tight);
  CHECK_THROWS_AS(api.get_estimates(sub.id, 4, nullptr), std::invalid_argument);
  CHECK_THROWS_AS(api.get_estimates(999, 4, noop), std::invalid_argument);
}

TEST_CASE("loose subscriptions see one global set per sync round") {
  auto api = make_api();
  auto& sub = api.set_attributes({attr("energy")}, {MetricKind::Entropy}, Timing::Loose);
  std::vector<uint64_t> seen;
  api.get_estimates(sub.id, 16, [&](uint64_t id, const Delivery& d) {
    CHECK(id == sub.id);
    seen.push_back(d.set.sync_round);
  });

  for (uint64_t r = 1; r <= 5; ++r)
    api.deliver_global(make_set(Scope::Global, kCentralSource, r * 10, r), r * 10);
  // local sets do not reach a Loose subscription
  api.deliver_local(make_set(Scope::Local, 0, 51), 51);

  CHECK(seen == std::vector<uint64_t>{1, 2, 3, 4, 5});
  CHECK(sub.buffer->size() == 5);
  for (const Delivery* d : sub.buffer->chronological())
    CHECK(d->set.scope == Scope::Global);
}

TEST_CASE("tight subscriptions see per-switch local sets, not globals") {
  auto api = make_api();
  auto& sub = api.set_attributes({attr("energy")}, {MetricKind::HeavyHitters},
                                 Timing::Tight);
  std::vector<uint32_t> sources;
  api.get_estimates(sub.id, 16, [&](uint64_t, const Delivery& d) {
    sources.push_back(d.set.source);
  });

  for (uint32_t sw = 0; sw < 4; ++sw)
    api.deliver_local(make_set(Scope::Local, sw, 7), 7);
  api.deliver_global(make_set(Scope::Global, kCentralSource, 7, 1), 7);

  CHECK(sources == std::vector<uint32_t>{0, 1, 2, 3});
  CHECK(sub.callbacks_fired == 4);
  CHECK(sub.buffer->newest().staleness == 0);
}

TEST_CASE("no traffic means zero callbacks") {
  auto api = make_api();
  auto& sub = api.set_attributes({attr("energy")}, {MetricKind::Entropy}, Timing::Loose);
  int calls = 0;
  api.get_estimates(sub.id, 4, [&](uint64_t, const Delivery&) { ++calls; });
  CHECK(calls == 0);
  CHECK(sub.buffer->size() == 0);
  CHECK_THROWS_AS(sub.buffer->newest(), std::logic_error);
}

TEST_CASE("full buffer overwrites oldest and never misses a callback") {
  auto api = make_api();
  auto& sub = api.set_attributes({attr("energy")}, {MetricKind::Entropy}, Timing::Loose);
  int calls = 0;
  api.get_estimates(sub.id, 4, [&](uint64_t, const Delivery&) { ++calls; });

  for (uint64_t r = 1; r <= 10; ++r)
    api.deliver_global(make_set(Scope::Global, kCentralSource, r, r), r);

  CHECK(calls == 10);
  CHECK(sub.buffer->size() == 4);
  CHECK(sub.buffer->overwrites() == 6);
  auto entries = sub.buffer->chronological();
  REQUIRE(entries.size() == 4);
  for (size_t i = 0; i < 4; ++i) CHECK(entries[i]->set.sync_round == 7 + i);
}

TEST_CASE("the triggering set is readable from the buffer inside the callback") {
  auto api = make_api();
  auto& sub = api.set_attributes({attr("energy")}, {MetricKind::Entropy}, Timing::Loose);
  api.get_estimates(sub.id, 2, [&](uint64_t id, const Delivery& d) {
    const Delivery& visible = api.subscription(id).buffer->newest();
    CHECK(visible.set == d.set);
    CHECK(visible.delivered_epoch == d.delivered_epoch);
  });
  for (uint64_t r = 1; r <= 3; ++r)
    api.deliver_global(make_set(Scope::Global, kCentralSource, r, r), r);
}

TEST_CASE("deliveries are projected to the subscribed dimensions and metrics") {
  auto api = make_api();
  auto& sub = api.set_attributes({attr("rank")},
                                 {MetricKind::Entropy, MetricKind::ChangeScore},
                                 Timing::Loose);
  api.get_estimates(sub.id, 4, [](uint64_t, const Delivery&) {});
  api.deliver_global(make_set(Scope::Global, kCentralSource, 3, 1), 3);

  const EstimateSet& got = sub.buffer->newest().set;
  REQUIRE(got.entries.size() == 2);  // dim-1 entropy plus whole-table change score
  CHECK(got.entries[0].dimension == 1);
  CHECK(got.entries[0].metric == MetricKind::Entropy);
  CHECK(got.entries[1].dimension == kTableDim);
  CHECK(got.entries[1].metric == MetricKind::ChangeScore);
  CHECK(got.epoch == 3);
  CHECK(got.sync_round == 1);
}

TEST_CASE("reconfiguration swaps the metric set atomically") {
  auto api = make_api();
  auto& sub = api.set_attributes({attr("energy")}, {MetricKind::Entropy}, Timing::Loose);
  api.get_estimates(sub.id, 16, [](uint64_t, const Delivery&) {});

  for (uint64_t r = 1; r <= 3; ++r)
    api.deliver_global(make_set(Scope::Global, kCentralSource, r, r), r);

  uint64_t id = sub.id;
  auto& re = api.set_attributes({attr("energy")},
                                {MetricKind::Cardinality, MetricKind::HeavyHitters},
                                Timing::Loose, id);
  CHECK(re.id == id);
  CHECK(api.subscription_count() == 1);

  for (uint64_t r = 4; r <= 6; ++r)
    api.deliver_global(make_set(Scope::Global, kCentralSource, r, r), r);

  CHECK(re.callbacks_fired == 6);  // buffer and counters survive reconfiguration
  for (const Delivery* d : re.buffer->chronological()) {
    if (d->set.sync_round <= 3) {
      REQUIRE(d->set.entries.size() == 1);
      CHECK(d->set.entries[0].metric == MetricKind::Entropy);
    } else {
      REQUIRE(d->set.entries.size() == 2);
      CHECK(d->set.entries[0].metric == MetricKind::Cardinality);
      CHECK(d->set.entries[1].metric == MetricKind::HeavyHitters);
    }
  }
  CHECK_THROWS_AS(api.set_attributes({attr("energy")}, {MetricKind::Entropy},
                                     Timing::Loose, 999),
                  std::invalid_argument);
}

TEST_CASE("staleness records the delivery lag in epochs") {
  auto api = make_api();
  auto& sub = api.set_attributes({attr("energy")}, {MetricKind::Entropy}, Timing::Loose);
  api.get_estimates(sub.id, 4, [](uint64_t, const Delivery&) {});
  api.deliver_global(make_set(Scope::Global, kCentralSource, 10, 1), 13);
  CHECK(sub.buffer->newest().staleness == 3);
  CHECK(sub.buffer->newest().delivered_epoch == 13);
}

TEST_CASE("active dimension mask is the union across subscriptions") {
  auto api = make_api();
  CHECK(api.active_dim_mask() == 0);
  api.set_attributes({attr("energy")}, {MetricKind::Entropy}, Timing::Loose);
  CHECK(api.active_dim_mask() == 0b001);
  api.set_attributes({attr("tag"), attr("rank")}, {MetricKind::Entropy}, Timing::Tight);
  CHECK(api.active_dim_mask() == 0b111);
  CHECK(api.subscription_ids().size() == 2);
}

TEST_CASE("subscriptions without an attached buffer are skipped, not faulted") {
  auto api = make_api();
  api.set_attributes({attr("energy")}, {MetricKind::Entropy}, Timing::Loose);
  api.deliver_global(make_set(Scope::Global, kCentralSource, 1, 1), 1);  // no throw
  CHECK(api.subscription(1).callbacks_fired == 0);

  // scope and entry point must agree
  CHECK_THROWS_AS(api.deliver_global(make_set(Scope::Local, 0, 1), 1),
                  std::logic_error);
  CHECK_THROWS_AS(api.deliver_local(make_set(Scope::Global, 0, 1), 1),
                  std::logic_error);
}
