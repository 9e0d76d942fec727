#include "coff/alignment.hpp"

#include <algorithm>
#include <stdexcept>

namespace coff {

AlignedPair align(const FeatureMap& receiver, const FeatureMap& sender) {
  if (receiver.channels() != sender.channels()) {
    throw std::invalid_argument("align: channel count mismatch");
  }
  const GridSpec& rspec = receiver.spec();
  const GridSpec& sspec = sender.spec();
  if (receiver.origin_pose() == sender.origin_pose() &&
      (rspec.voxel_x() != sspec.voxel_x() || rspec.voxel_y() != sspec.voxel_y())) {
    throw std::invalid_argument("align: co-located maps with different voxel sizes");
  }

  const std::size_t h = receiver.height();
  const std::size_t w = receiver.width();
  const std::size_t channels = receiver.channels();
  AlignedPair pair{receiver, FeatureMap(rspec, channels, receiver.origin_pose()), {}};
  OverlapRegion& ov = pair.overlap;
  ov.mask.assign(h * w, 0);
  ov.area_total = h * w;

  std::size_t row_lo = h, row_hi = 0, col_lo = w, col_hi = 0;
  const Pose2D& rpose = receiver.origin_pose();
  const Pose2D& spose = sender.origin_pose();
  const std::size_t rplane = receiver.plane_size();
  const std::size_t splane = sender.plane_size();
  std::span<float> out = pair.sender_resampled.values();
  std::span<const float> in = sender.values();

  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const Point2 world = rpose.to_world(rspec.cell_center({r, c}));
      const auto hit = world_to_cell(sspec, spose.to_local(world));
      if (!hit) continue;
      const std::size_t dst = r * w + c;
      const std::size_t src = hit->row * sender.width() + hit->col;
      ov.mask[dst] = 1;
      ++ov.area_overlap;
      row_lo = std::min(row_lo, r);
      row_hi = std::max(row_hi, r);
      col_lo = std::min(col_lo, c);
      col_hi = std::max(col_hi, c);
      for (std::size_t ch = 0; ch < channels; ++ch) {
        out[ch * rplane + dst] = in[ch * splane + src];
      }
    }
  }
  if (ov.area_overlap > 0) {
    ov.height = row_hi - row_lo + 1;
    ov.width = col_hi - col_lo + 1;
  }
  return pair;
}

Region gather(const FeatureMap& map, std::vector<std::uint32_t> cells) {
  Region region;
  region.channels = map.channels();
  region.cells = std::move(cells);
  const std::size_t n = region.cells.size();
  region.values.resize(region.channels * n);
  for (std::size_t c = 0; c < region.channels; ++c) {
    std::span<const float> plane = map.channel(c);
    for (std::size_t k = 0; k < n; ++k) region.values[c * n + k] = plane[region.cells[k]];
  }
  return region;
}

void scatter(const Region& region, FeatureMap& map) {
  if (region.channels != map.channels()) {
    throw std::invalid_argument("scatter: channel count mismatch");
  }
  const std::size_t n = region.cells.size();
  const std::size_t plane = map.plane_size();
  std::span<float> values = map.values();
  for (std::size_t c = 0; c < region.channels; ++c) {
    for (std::size_t k = 0; k < n; ++k) values[c * plane + region.cells[k]] = region.values[c * n + k];
  }
}

SplitRegions split_regions(const AlignedPair& pair) {
  std::vector<std::uint32_t> inside;
  std::vector<std::uint32_t> outside;
  inside.reserve(pair.overlap.area_overlap);
  outside.reserve(pair.overlap.area_total - pair.overlap.area_overlap);
  for (std::size_t i = 0; i < pair.overlap.mask.size(); ++i) {
    (pair.overlap.mask[i] ? inside : outside).push_back(static_cast<std::uint32_t>(i));
  }
  SplitRegions split;
  split.receiver_overlap = gather(pair.receiver, inside);
  split.sender_overlap = gather(pair.sender_resampled, std::move(inside));
  split.receiver_only = gather(pair.receiver, std::move(outside));
  return split;
}

}  // namespace coff
