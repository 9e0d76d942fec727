#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace coff {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Range {
  double min = 0.0;
  double max = 0.0;
  double length() const { return max - min; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// Rigid BEV pose of a vehicle in the world frame. Heading in (-pi, pi].
class Pose2D {
 public:
  Pose2D() = default;
  Pose2D(double x, double y, double heading);

  double x() const { return x_; }
  double y() const { return y_; }
  double heading() const { return heading_; }

  /// Maps a point from this pose's local frame into the world frame.
  Point2 to_world(Point2 local) const;
  /// Maps a world point into this pose's local frame.
  Point2 to_local(Point2 world) const;

  double distance_to(const Pose2D& other) const;

  friend bool operator==(const Pose2D&, const Pose2D&) = default;

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double heading_ = 0.0;
};

double normalize_angle(double radians);

struct CellIndex {
  std::size_t row = 0;  // along y
  std::size_t col = 0;  // along x
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// BEV discretization of a vehicle-local region. The z range is carried for
/// completeness only; the feature map collapses it.
class GridSpec {
 public:
  /// Default: x in [0, 70.4], y in [-40, 40], z in [-3, 1], 0.4 m voxels.
  GridSpec();
  GridSpec(Range x, Range y, Range z, double voxel_x, double voxel_y);

  const Range& x_range() const { return x_; }
  const Range& y_range() const { return y_; }
  const Range& z_range() const { return z_; }
  double voxel_x() const { return voxel_x_; }
  double voxel_y() const { return voxel_y_; }
  std::size_t cells_x() const { return cells_x_; }
  std::size_t cells_y() const { return cells_y_; }
  std::size_t cell_count() const { return cells_x_ * cells_y_; }

  Point2 cell_center(CellIndex cell) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  Range x_;
  Range y_;
  Range z_;
  double voxel_x_;
  double voxel_y_;
  std::size_t cells_x_;
  std::size_t cells_y_;
};

/// Floor discretization; points on the max edge land in the last cell.
std::optional<CellIndex> world_to_cell(const GridSpec& spec, Point2 point);

/// C x H x W nonnegative grid anchored to the generating vehicle's pose.
/// Storage is channel-major, then row-major (row = y index, col = x index).
class FeatureMap {
 public:
  static constexpr std::size_t kDefaultChannels = 128;

  FeatureMap() = default;
  FeatureMap(GridSpec spec, std::size_t channels, Pose2D origin_pose = {});
  /// Takes ownership of `values`; throws if the size or any value is invalid.
  FeatureMap(GridSpec spec, std::size_t channels, Pose2D origin_pose,
             std::vector<float> values);

  const GridSpec& spec() const { return spec_; }
  const Pose2D& origin_pose() const { return pose_; }
  std::size_t channels() const { return channels_; }
  std::size_t height() const { return spec_.cells_y(); }
  std::size_t width() const { return spec_.cells_x(); }
  std::size_t plane_size() const { return spec_.cell_count(); }

  float at(std::size_t channel, std::size_t row, std::size_t col) const {
    return values_[channel * plane_size() + row * width() + col];
  }
  float& at(std::size_t channel, std::size_t row, std::size_t col) {
    return values_[channel * plane_size() + row * width() + col];
  }

  std::span<const float> values() const { return values_; }
  std::span<float> values() { return values_; }
  std::span<const float> channel(std::size_t c) const {
    return std::span<const float>(values_).subspan(c * plane_size(), plane_size());
  }

  void set_origin_pose(const Pose2D& pose) { pose_ = pose; }

  /// Largest value across channels at a flat cell index.
  float channel_max(std::size_t flat_cell) const;

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  GridSpec spec_;
  std::size_t channels_ = 0;
  Pose2D pose_;
  std::vector<float> values_;
};

enum class FeatureClass { Background, Weak, Strong };

const char* to_string(FeatureClass c);

struct ClassifyConfig {
  float strong_threshold = 0.5F;
  double strong_fraction = 0.5;
};

FeatureClass classify_feature(std::span<const float> patch,
                              const ClassifyConfig& cfg = {});

/// Copies every channel of the given row/col window into one flat patch.
std::vector<float> extract_patch(const FeatureMap& map, std::size_t row0,
                                 std::size_t col0, std::size_t rows,
                                 std::size_t cols);

}  // namespace coff
