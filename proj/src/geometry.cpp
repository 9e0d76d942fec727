#include "coff/geometry.hpp"

#include <cmath>
#include <limits>

namespace coff {

double iou(const AxisBox& a, const AxisBox& b) {
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::array<Point2, 4> OrientedBox::corners() const {
  const Pose2D frame(center.x, center.y, heading);
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  return {frame.to_world({-hl, -hw}), frame.to_world({hl, -hw}),
          frame.to_world({hl, hw}), frame.to_world({-hl, hw})};
}

AxisBox OrientedBox::bounds() const { return bounds_in(Pose2D{}); }

AxisBox OrientedBox::bounds_in(const Pose2D& frame) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  AxisBox box{inf, inf, -inf, -inf};
  for (const Point2& c : corners()) {
    const Point2 p = frame.to_local(c);
    box.x_min = std::min(box.x_min, p.x);
    box.y_min = std::min(box.y_min, p.y);
    box.x_max = std::max(box.x_max, p.x);
    box.y_max = std::max(box.y_max, p.y);
  }
  return box;
}

std::optional<double> ray_hit(Point2 origin, Point2 dir, const OrientedBox& box) {
  // Slab test in the box frame.
  const Pose2D frame(box.center.x, box.center.y, box.heading);
  const Point2 o = frame.to_local(origin);
  const double c = std::cos(frame.heading());
  const double s = std::sin(frame.heading());
  const Point2 d{c * dir.x + s * dir.y, -s * dir.x + c * dir.y};
  const double half[2] = {0.5 * box.length, 0.5 * box.width};
  const double oo[2] = {o.x, o.y};
  const double dd[2] = {d.x, d.y};

  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 2; ++axis) {
    if (std::abs(dd[axis]) < 1e-15) {
      if (oo[axis] < -half[axis] || oo[axis] > half[axis]) return std::nullopt;
      continue;
    }
    double t0 = (-half[axis] - oo[axis]) / dd[axis];
    double t1 = (half[axis] - oo[axis]) / dd[axis];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far || t_far <= 0.0) return std::nullopt;
  // Origin inside the box: the sensor is enclosed, no return.
  if (t_near <= 0.0) return std::nullopt;
  return t_near;
}

}  // namespace coff
