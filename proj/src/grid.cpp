#include "coff/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace coff {

namespace {

std::size_t cell_count_for(const Range& r, double voxel) {
  // 70.4 / 0.4 is not exactly 176 in binary; tolerate the rounding residue.
  const double n = r.length() / voxel;
  return static_cast<std::size_t>(std::ceil(n - 1e-9));
}

std::size_t floor_cell(double offset, double voxel, std::size_t cells) {
  const auto idx = static_cast<std::size_t>(std::floor(offset / voxel));
  return std::min(idx, cells - 1);
}

}  // namespace

double normalize_angle(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(radians, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

Pose2D::Pose2D(double x, double y, double heading)
    : x_(x), y_(y), heading_(normalize_angle(heading)) {}

Point2 Pose2D::to_world(Point2 local) const {
  const double c = std::cos(heading_);
  const double s = std::sin(heading_);
  return {x_ + c * local.x - s * local.y, y_ + s * local.x + c * local.y};
}

Point2 Pose2D::to_local(Point2 world) const {
  const double c = std::cos(heading_);
  const double s = std::sin(heading_);
  const double dx = world.x - x_;
  const double dy = world.y - y_;
  return {c * dx + s * dy, -s * dx + c * dy};
}

double Pose2D::distance_to(const Pose2D& other) const {
  return std::hypot(other.x_ - x_, other.y_ - y_);
}

GridSpec::GridSpec() : GridSpec({0.0, 70.4}, {-40.0, 40.0}, {-3.0, 1.0}, 0.4, 0.4) {}

GridSpec::GridSpec(Range x, Range y, Range z, double voxel_x, double voxel_y)
    : x_(x), y_(y), z_(z), voxel_x_(voxel_x), voxel_y_(voxel_y) {
  if (!(x.max > x.min) || !(y.max > y.min) || !(z.max > z.min)) {
    throw std::invalid_argument("GridSpec: every range needs max > min");
  }
  if (!(voxel_x > 0.0) || !(voxel_y > 0.0)) {
    throw std::invalid_argument("GridSpec: voxel sizes must be positive");
  }
  cells_x_ = cell_count_for(x_, voxel_x_);
  cells_y_ = cell_count_for(y_, voxel_y_);
}

Point2 GridSpec::cell_center(CellIndex cell) const {
  return {x_.min + (static_cast<double>(cell.col) + 0.5) * voxel_x_,
          y_.min + (static_cast<double>(cell.row) + 0.5) * voxel_y_};
}

std::optional<CellIndex> world_to_cell(const GridSpec& spec, Point2 p) {
  const Range& xr = spec.x_range();
  const Range& yr = spec.y_range();
  if (!(p.x >= xr.min && p.x <= xr.max && p.y >= yr.min && p.y <= yr.max)) {
    return std::nullopt;
  }
  return CellIndex{floor_cell(p.y - yr.min, spec.voxel_y(), spec.cells_y()),
                   floor_cell(p.x - xr.min, spec.voxel_x(), spec.cells_x())};
}

FeatureMap::FeatureMap(GridSpec spec, std::size_t channels, Pose2D origin_pose)
    : spec_(spec),
      channels_(channels),
      pose_(origin_pose),
      values_(channels * spec.cell_count(), 0.0F) {
  if (channels == 0) throw std::invalid_argument("FeatureMap: zero channels");
}

FeatureMap::FeatureMap(GridSpec spec, std::size_t channels, Pose2D origin_pose,
                       std::vector<float> values)
    : spec_(spec), channels_(channels), pose_(origin_pose), values_(std::move(values)) {
  if (channels == 0) throw std::invalid_argument("FeatureMap: zero channels");
  if (values_.size() != channels * spec.cell_count()) {
    throw std::invalid_argument("FeatureMap: value count " +
                                std::to_string(values_.size()) +
                                " does not match C*H*W");
  }
  for (float v : values_) {
    if (!(v >= 0.0F)) {
      throw std::invalid_argument("FeatureMap: values must be finite and >= 0");
    }
  }
}

float FeatureMap::channel_max(std::size_t flat_cell) const {
  float m = 0.0F;
  for (std::size_t c = 0; c < channels_; ++c) {
    m = std::max(m, values_[c * plane_size() + flat_cell]);
  }
  return m;
}

const char* to_string(FeatureClass c) {
  switch (c) {
    case FeatureClass::Background: return "background";
    case FeatureClass::Weak: return "weak";
    case FeatureClass::Strong: return "strong";
  }
  return "?";
}

FeatureClass classify_feature(std::span<const float> patch, const ClassifyConfig& cfg) {
  if (patch.empty()) throw std::invalid_argument("classify_feature: empty patch");
  std::size_t above = 0;
  bool any_nonzero = false;
  for (float v : patch) {
    if (v != 0.0F) any_nonzero = true;
    if (v >= cfg.strong_threshold) ++above;
  }
  if (!any_nonzero) return FeatureClass::Background;
  const double fraction = static_cast<double>(above) / static_cast<double>(patch.size());
  return fraction >= cfg.strong_fraction ? FeatureClass::Strong : FeatureClass::Weak;
}

std::vector<float> extract_patch(const FeatureMap& map, std::size_t row0,
                                 std::size_t col0, std::size_t rows,
                                 std::size_t cols) {
  if (row0 + rows > map.height() || col0 + cols > map.width()) {
    throw std::out_of_range("extract_patch: window exceeds map bounds");
  }
  std::vector<float> out;
  out.reserve(map.channels() * rows * cols);
  for (std::size_t c = 0; c < map.channels(); ++c) {
    for (std::size_t r = row0; r < row0 + rows; ++r) {
      for (std::size_t q = col0; q < col0 + cols; ++q) out.push_back(map.at(c, r, q));
    }
  }
  return out;
}

}  // namespace coff
