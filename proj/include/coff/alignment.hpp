#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "coff/grid.hpp"

namespace coff {

/// Cells of the receiver grid that the sender's footprint also covers.
struct OverlapRegion {
  std::vector<std::uint8_t> mask;  // H x W, row-major
  std::size_t area_overlap = 0;    // A_o
  std::size_t area_total = 0;      // A
  std::size_t width = 0;           // tight bounding box of the mask, in cells
  std::size_t height = 0;

  double ratio() const {
    return area_total == 0 ? 0.0
                           : static_cast<double>(area_overlap) / static_cast<double>(area_total);
  }
};

/// Sender resampled onto the receiver grid. Cells outside the overlap hold 0
/// in `sender_resampled` and are not part of any fusion.
struct AlignedPair {
  FeatureMap receiver;
  FeatureMap sender_resampled;
  OverlapRegion overlap;
};

/// A set of grid cells with all of their channel values, channel-major:
/// values[c * cells.size() + k] belongs to cells[k].
struct Region {
  std::size_t channels = 0;
  std::vector<std::uint32_t> cells;  // flat row-major indices
  std::vector<float> values;

  std::size_t size() const { return cells.size(); }
  bool empty() const { return cells.empty(); }
  float at(std::size_t channel, std::size_t k) const { return values[channel * cells.size() + k]; }
  float& at(std::size_t channel, std::size_t k) { return values[channel * cells.size() + k]; }
};

/// Resamples `sender` onto the receiver's grid by nearest-cell lookup through
/// the relative rigid transform of the two origin poses.
AlignedPair align(const FeatureMap& receiver, const FeatureMap& sender);

struct SplitRegions {
  Region receiver_overlap;  // F1
  Region sender_overlap;    // F2
  Region receiver_only;     // F3
};

SplitRegions split_regions(const AlignedPair& pair);

/// Copies the listed cells of `map` into a Region.
Region gather(const FeatureMap& map, std::vector<std::uint32_t> cells);

/// Writes a Region's values back into `map` at its cells.
void scatter(const Region& region, FeatureMap& map);

}  // namespace coff
