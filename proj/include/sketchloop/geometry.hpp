#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sketchloop {

// Shape of one sketch instance. Two sketches are mergeable/diffable iff
// their geometries (seed included) compare equal.
struct SketchGeometry {
  uint32_t depth = 5;        // rows per count-sketch table
  uint32_t width = 2048;     // columns per row, power of two
  uint32_t levels = 16;      // subsampling levels (level 0 sees everything)
  uint32_t dimensions = 1;   // attributes sharing the tables
  uint32_t track_k = 64;     // heavy-hitter tracker capacity per (dim, level)
  uint64_t seed = 0;

  bool operator==(const SketchGeometry&) const = default;

  void validate() const {
    if (depth < 1 || depth > 64)
      throw std::invalid_argument("sketch depth must be in [1, 64]");
    if (width < 2 || (width & (width - 1)) != 0)
      throw std::invalid_argument("sketch width must be a power of two >= 2");
    if (levels < 1 || levels > 64)
      throw std::invalid_argument("sketch levels must be in [1, 64]");
    if (dimensions < 1 || dimensions > 4096)
      throw std::invalid_argument("sketch dimensions must be in [1, 4096]");
    if (track_k < 1)
      throw std::invalid_argument("tracker capacity must be >= 1");
  }
};

inline std::string geometry_str(const SketchGeometry& g) {
  return "d=" + std::to_string(g.depth) + " w=" + std::to_string(g.width) +
         " L=" + std::to_string(g.levels) + " D=" + std::to_string(g.dimensions) +
         " k=" + std::to_string(g.track_k);
}

}  // namespace sketchloop
