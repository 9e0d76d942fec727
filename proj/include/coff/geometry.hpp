#pragma once

#include <algorithm>
#include <array>

#include "coff/grid.hpp"

namespace coff {

/// Axis-aligned BEV rectangle in meters.
struct AxisBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
  Point2 center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }

  friend bool operator==(const AxisBox&, const AxisBox&) = default;
};

double iou(const AxisBox& a, const AxisBox& b);

/// Oriented vehicle footprint.
struct OrientedBox {
  Point2 center;
  double length = 4.5;  // along heading
  double width = 1.8;
  double heading = 0.0;

  std::array<Point2, 4> corners() const;
  AxisBox bounds() const;
  /// Axis-aligned bounds after mapping the corners into `frame`'s local frame.
  AxisBox bounds_in(const Pose2D& frame) const;
};

/// Distance along the ray to the first boundary crossing of `box`, if any.
/// `dir` must be unit length.
std::optional<double> ray_hit(Point2 origin, Point2 dir, const OrientedBox& box);

}  // namespace coff
