#pragma once

#include <cstdint>
#include <string_view>

namespace sketchloop {

// splitmix64 finalizer. Bijective on 64 bits; the single mixing primitive
// everything else (bucket choice, sign, level membership, seed derivation)
// is built from.
inline uint64_t sm64_mix(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Keyed mix: one evaluation per call. Callers that care about hash-economy
// (the sketch update path) count invocations themselves.
inline uint64_t mix64(uint64_t key, uint64_t seed) {
  return sm64_mix(key ^ sm64_mix(seed));
}

// Counter-mode stream over a master seed; element n is independent of how
// many elements were read before it.
inline uint64_t seed_at(uint64_t master, uint64_t n) {
  return sm64_mix(master + n * 0x9e3779b97f4a7c15ULL);
}

// Named sub-seed (workload vs sketch vs sampling streams etc.).
inline uint64_t sub_seed(uint64_t master, std::string_view tag) {
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the tag
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return sm64_mix(master ^ h);
}

// Per-dimension key salt. Fixed (not seed-dependent) so that composite keys
// are stable across runs with different seeds: composite = key ^ dim_salt.
inline uint64_t dim_salt(uint32_t dim) { return sm64_mix(uint64_t{dim} + 1); }

inline uint64_t composite_key(uint64_t key, uint32_t dim) {
  return key ^ dim_salt(dim);
}

// Lays out every seed a sketch needs from one geometry seed, in counter mode:
// first L level-membership seeds (index 0 reserved, level 0 is unconditional),
// then L*d per-(level,row) table seeds. Shared by the merged sketch and the
// standalone single-dimension sketch so the two produce bit-identical tables.
struct SeedSchedule {
  uint64_t master = 0;
  uint32_t levels = 0;
  uint32_t rows = 0;

  SeedSchedule() = default;
  SeedSchedule(uint64_t master_seed, uint32_t L, uint32_t d)
      : master(master_seed), levels(L), rows(d) {}

  uint64_t level_seed(uint32_t level) const { return seed_at(master, level); }

  uint64_t row_seed(uint32_t level, uint32_t row) const {
    return seed_at(master, levels + uint64_t{level} * rows + row);
  }
};

// Level membership bit g_l(key) for l >= 1. Exactly one mix64 evaluation.
inline bool level_bit(uint64_t composite, uint64_t level_seed) {
  return mix64(composite, level_seed) & 1;
}

}  // namespace sketchloop
