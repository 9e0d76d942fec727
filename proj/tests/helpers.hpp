#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "coff/grid.hpp"
#include "oracle.hpp"

namespace coff::testing {

// W x H grid of `voxel`-sized cells anchored at the local origin.
inline GridSpec small_spec(std::size_t w, std::size_t h, double voxel = 1.0) {
  return GridSpec({0.0, static_cast<double>(w) * voxel}, {0.0, static_cast<double>(h) * voxel},
                  {-3.0, 1.0}, voxel, voxel);
}

inline FeatureMap random_map(std::mt19937_64& rng, std::size_t c, std::size_t h, std::size_t w,
                             Pose2D pose = {}, double density = 0.5) {
  return FeatureMap(small_spec(w, h), c, pose, oracle::random_values(rng, c * h * w, density));
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace coff::testing
