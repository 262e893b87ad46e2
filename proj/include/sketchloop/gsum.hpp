#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sketchloop {

// Which G-sum a universal-sketch query evaluates: sum over distinct keys of
// g(frequency).
struct GsumKind {
  enum class Fn : uint8_t {
    Cardinality = 0,     // g(x) = 1
    Entropy = 1,         // g(x) = x * log2(x)
    L2 = 2,              // g(x) = x^2 (second moment, not its square root)
    FrequencyMoment = 3  // g(x) = x^order
  };

  Fn fn = Fn::Cardinality;
  uint32_t order = 0;  // FrequencyMoment only

  static GsumKind cardinality() { return {Fn::Cardinality, 0}; }
  static GsumKind entropy() { return {Fn::Entropy, 0}; }
  static GsumKind l2() { return {Fn::L2, 0}; }
  static GsumKind frequency_moment(uint32_t order) {
    GsumKind k{Fn::FrequencyMoment, order};
    k.validate();
    return k;
  }

  void validate() const {
    if (fn == Fn::FrequencyMoment && order > 4)
      throw std::invalid_argument("frequency moment order must be <= 4");
  }

  bool operator==(const GsumKind&) const = default;
};

// g(f) with the estimate clamped to >= 1 first; tracked keys were observed at
// least once, so sub-1 (or negative) count-sketch estimates are noise.
inline double g_eval(const GsumKind& g, double f) {
  if (f < 1.0) f = 1.0;
  switch (g.fn) {
    case GsumKind::Fn::Cardinality: return 1.0;
    case GsumKind::Fn::Entropy: return f * std::log2(f);
    case GsumKind::Fn::L2: return f * f;
    case GsumKind::Fn::FrequencyMoment: return std::pow(f, g.order);
  }
  return 0.0;
}

// Recursive universal-sketch estimator over per-level heavy hitters:
//   Y[L-1] = sum over HH[L-1] of g(f)
//   Y[j]   = 2 * Y[j+1] + sum over HH[j] of (1 - 2 * bit(j+1, key)) * g(f)
// entries_at(l) yields (key, estimate) pairs for level l; bit(l, key) is the
// level-l membership hash of the key.
template <class EntriesAt, class LevelBit>
double gsum_recurse(uint32_t levels, const GsumKind& g, EntriesAt&& entries_at,
                    LevelBit&& bit) {
  g.validate();
  double y = 0.0;
  for (int64_t l = static_cast<int64_t>(levels) - 1; l >= 0; --l) {
    double contrib = 0.0;
    for (const auto& [key, f] : entries_at(static_cast<uint32_t>(l))) {
      double gf = g_eval(g, f);
      if (l == static_cast<int64_t>(levels) - 1) {
        contrib += gf;
      } else {
        contrib += (bit(static_cast<uint32_t>(l) + 1, key) ? -1.0 : 1.0) * gf;
      }
    }
    y = (l == static_cast<int64_t>(levels) - 1) ? contrib : 2.0 * y + contrib;
  }
  return y;
}

// Shannon entropy in bits from the entropy G-sum: H = log2(m) - Y/m,
// clamped into [0, log2(m)].
inline double entropy_from_gsum(uint64_t m, double y) {
  if (m == 0) throw std::domain_error("entropy of an empty stream is undefined");
  double lm = std::log2(static_cast<double>(m));
  double h = lm - y / static_cast<double>(m);
  if (h < 0.0) h = 0.0;
  if (h > lm) h = lm;
  return h;
}

}  // namespace sketchloop
