#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>

#include "sketchloop/sampling.hpp"

using namespace sketchloop;

TEST_CASE("p = 1 selects every row and consumes no randomness") {
  SamplingState s(5, 1.0, 42);
  for (int i = 0; i < 100; ++i) CHECK(s.next_mask() == 0b11111);
  CHECK(s.draws() == 0);
  CHECK(s.scale_weight(7) == 7);
  CHECK(s.exact());
}

TEST_CASE("selection rate tracks p per row") {
  SamplingState s(4, 0.1, 7);
  uint64_t selected = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) selected += std::popcount(s.next_mask());
  double rate = static_cast<double>(selected) / (4.0 * n);
  CHECK(rate == doctest::Approx(0.1).epsilon(0.05));
  CHECK(s.draws() > 0);
}

TEST_CASE("integral 1/p scales weights exactly") {
  SamplingState s(2, 0.1, 1);
  CHECK(s.scale_weight(1) == 10);
  CHECK(s.scale_weight(3) == 30);
  SamplingState h(2, 0.5, 1);
  CHECK(h.scale_weight(4) == 8);
}

TEST_CASE("non-integral 1/p stays unbiased through stochastic rounding") {
  SamplingState s(1, 0.3, 99);
  const int n = 100000;
  int64_t sum = 0;
  for (int i = 0; i < n; ++i) sum += s.scale_weight(1);
  // E[scaled] = 1/0.3 = 3.333...; three sigmas of the rounding noise is tiny.
  double mean = static_cast<double>(sum) / n;
  CHECK(mean == doctest::Approx(1.0 / 0.3).epsilon(0.01));
}

TEST_CASE("scaled selected mass is an unbiased estimate of the stream mass") {
  SamplingState s(1, 0.1, 5);
  const int n = 100000;
  int64_t mass = 0;
  for (int i = 0; i < n; ++i)
    if (s.next_mask() & 1) mass += s.scale_weight(1);
  // Var per record = 1/p - 1 = 9, sigma = sqrt(9n) ~ 950.
  CHECK(std::abs(static_cast<double>(mass - n)) < 4.0 * std::sqrt(9.0 * n));
}

TEST_CASE("same seed reproduces the same mask sequence") {
  SamplingState a(5, 0.25, 123), b(5, 0.25, 123), c(5, 0.25, 124);
  bool all_same = true, any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    uint64_t ma = a.next_mask();
    if (ma != b.next_mask()) all_same = false;
    if (ma != c.next_mask()) any_diff = true;
  }
  CHECK(all_same);
  CHECK(any_diff);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(SamplingState(0, 0.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(SamplingState(5, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(SamplingState(5, 1.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(SamplingState(5, -0.1, 1), std::invalid_argument);
}
