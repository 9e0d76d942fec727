#include "coff/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace coff {

namespace {

constexpr double kLattice = 0.4;
constexpr double kMinGap = 1.2;
constexpr double kCarLength = 4.5;
constexpr double kCarWidth = 1.8;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

double snap(double v) { return std::round(v / kLattice) * kLattice; }

AxisBox grown(AxisBox b, double margin) {
  return {b.x_min - margin, b.y_min - margin, b.x_max + margin, b.y_max + margin};
}

bool intersects(const AxisBox& a, const AxisBox& b) {
  return a.x_min < b.x_max && b.x_min < a.x_max && a.y_min < b.y_max && b.y_min < a.y_max;
}

class Placer {
 public:
  explicit Placer(Scene& scene) : scene_(scene) {
    for (const VehicleNode& v : scene.vehicles) {
      OrientedBox footprint{{v.pose.x(), v.pose.y()}, kCarLength, kCarWidth, v.pose.heading()};
      blocked_.push_back(grown(footprint.bounds(), 1.5));
    }
  }

  bool try_place(Point2 center, double heading) {
    OrientedBox box{center, kCarLength, kCarWidth, heading};
    const AxisBox bounds = box.bounds();
    for (const AxisBox& b : blocked_) {
      if (intersects(bounds, b)) return false;
    }
    for (const GroundTruthBox& o : scene_.objects) {
      if (intersects(grown(bounds, kMinGap), o.box.bounds())) return false;
    }
    scene_.objects.push_back({static_cast<int>(scene_.objects.size()), box});
    return true;
  }

 private:
  Scene& scene_;
  std::vector<AxisBox> blocked_;
};

void add_vehicle(Scene& scene, double x, double y, double heading) {
  VehicleNode v;
  v.pose = Pose2D(x, y, heading);
  scene.vehicles.push_back(std::move(v));
}

void layout_multilane(Scene& scene, Rng& rng) {
  constexpr double lanes[] = {-3.6, 0.0, 3.6};
  add_vehicle(scene, 0.0, 0.0, 0.0);
  add_vehicle(scene, std::clamp(snap(rng.uniform(20.0, 40.0)), 20.0, 40.0), 0.0, 0.0);
  Placer placer(scene);
  const int n = rng.uniform_int(6, 12);
  for (int attempts = 0; static_cast<int>(scene.objects.size()) < n && attempts < 2000; ++attempts) {
    const double lane = lanes[rng.uniform_int(0, 2)];
    const double heading = lane > 0.0 ? std::numbers::pi : 0.0;
    placer.try_place({rng.uniform(6.0, 66.0), lane}, heading);
  }
}

void layout_intersection(Scene& scene, Rng& rng) {
  const double cx = snap(rng.uniform(28.0, 36.0));
  add_vehicle(scene, 0.0, 0.0, 0.0);
  add_vehicle(scene, cx - 1.8, -snap(rng.uniform(12.0, 24.0)), std::numbers::pi / 2.0);
  Placer placer(scene);
  const int n = rng.uniform_int(8, 14);
  for (int attempts = 0; static_cast<int>(scene.objects.size()) < n && attempts < 4000; ++attempts) {
    if (rng.uniform() < 0.6) {
      const bool oncoming = rng.uniform() < 0.5;
      const double x = rng.uniform(6.0, 66.0);
      if (std::abs(x - cx) < 6.0) continue;
      placer.try_place({x, oncoming ? 3.6 : 0.0}, oncoming ? std::numbers::pi : 0.0);
    } else {
      const bool southbound = rng.uniform() < 0.5;
      const double y = rng.uniform(-36.0, 36.0);
      if (std::abs(y) < 6.0) continue;
      placer.try_place({southbound ? cx + 1.8 : cx - 1.8, y},
                       southbound ? -std::numbers::pi / 2.0 : std::numbers::pi / 2.0);
    }
  }
}

void layout_parking_lot(Scene& scene, Rng& rng) {
  // Two blocks along the central aisle, split by a cross aisle. In each block
  // and on each side there is a continuous front row of parallel-parked cars.
  // Rear-row cars go only where that front row shadows them from the receiver
  // at the origin; whatever does not fit there extends the front row.
  constexpr double front_y = 4.8;
  constexpr double rear_y[] = {7.9, 11.0};
  const double half_l = kCarLength / 2.0;
  const double half_w = kCarWidth / 2.0;
  add_vehicle(scene, 0.0, 0.0, 0.0);
  add_vehicle(scene, std::clamp(snap(rng.uniform(20.0, 40.0)), 20.0, 40.0), 0.0, 0.0);
  Placer placer(scene);

  // Rays to a rear row's nearest corner must cross the front row's inner
  // edge past its first car; rays to the far corner before its last car.
  auto shadow = [&](double ry, double front_begin, double front_end) {
    const double lo = (front_begin + 0.2) * (ry + half_w) / (front_y - half_w) + half_l;
    const double hi = (front_end - 0.2) * (ry - half_w) / (front_y + half_w) - half_l;
    return std::pair{lo, std::min(hi, 68.0 - half_l)};
  };

  // Places up to `cars` cars in one block. The front row grows until its
  // shadow has room for the rest; returns where the front row ends.
  auto block = [&](double sign, double start, int cars) {
    double x = start;
    double front_end = start;
    const double front_begin = start - half_l;
    auto extend_front = [&](int count) {
      for (int placed = 0; placed < count && x + half_l < 68.0;) {
        if (placer.try_place({x, sign * front_y}, 0.0)) {
          ++placed;
          front_end = x + half_l;
        }
        x += kCarLength + rng.uniform(kMinGap, 1.6);
      }
    };
    auto room = [&] {
      double slots = 0.0;
      for (double ry : rear_y) {
        const auto [lo, hi] = shadow(ry, front_begin, front_end);
        if (hi > lo + 2.0) slots += std::floor((hi - lo - 2.0) / (kCarLength + 2.0)) + 1.0;
      }
      return slots;
    };
    int front = 0;
    while (front < cars && x + half_l < 68.0 && room() < cars - front) {
      extend_front(1);
      ++front;
    }

    // The second pass ignores vacancies and fills what shadow is left.
    int rest = cars - front;
    for (int pass = 0; pass < 2 && rest > 0; ++pass) {
      for (double ry : rear_y) {
        const auto [lo, hi] = shadow(ry, front_begin, front_end);
        int quota = pass == 0 && ry == rear_y[0] ? (rest + 1) / 2 : rest;
        for (double rx = lo + rng.uniform(0.0, 2.0); quota > 0 && rx <= hi;) {
          if ((pass == 1 || rng.uniform() >= 0.15) && placer.try_place({rx, sign * ry}, 0.0)) {
            --quota;
            --rest;
          }
          rx += pass == 0 ? kCarLength + rng.uniform(kMinGap, 2.0) : 0.5;
        }
      }
    }
    extend_front(rest);
    return front_end;
  };

  const int n = rng.uniform_int(14, 24);
  for (int side = 0; side < 2; ++side) {
    const double sign = side == 0 ? 1.0 : -1.0;
    const int cars = side == 0 ? (n + 1) / 2 : n / 2;
    // The far block is mostly beyond any shadow, so the near one holds the
    // hidden cars.
    const int near_cars = cars - cars / 4;
    const double end = block(sign, rng.uniform(6.0, 10.0), near_cars);
    block(sign, std::max(end + 6.0 + half_l, rng.uniform(40.0, 46.0)), cars / 4);
  }
}

}  // namespace

void LidarModel::validate() const {
  if (beams < 1 || beams > 1024) throw std::invalid_argument("LidarModel: beams must be in [1, 1024]");
  if (!(max_range > 0.0)) throw std::invalid_argument("LidarModel: max_range must be > 0");
  if (!(azimuth_step > 0.0)) throw std::invalid_argument("LidarModel: azimuth_step must be > 0");
  if (!(vertical_fov > 0.0) || !(target_height > 0.0)) {
    throw std::invalid_argument("LidarModel: vertical_fov and target_height must be > 0");
  }
}

double LidarModel::hit_probability(double range) const {
  if (!dropout) return 1.0;
  return std::clamp(1.0 - range / max_range, dropout_floor, 1.0);
}

unsigned LidarModel::rings_on_target(double range) const {
  const double span = std::atan(target_height / std::max(range, 1e-6));
  const long rings = std::lround(static_cast<double>(beams) * span / vertical_fov);
  return static_cast<unsigned>(std::clamp<long>(rings, 1, beams));
}

std::size_t PointCloud::count_for(int object_id) const {
  return static_cast<std::size_t>(std::count(object_ids.begin(), object_ids.end(), object_id));
}

ScenarioTemplate parse_template(std::string_view name) {
  if (name == "intersection") return ScenarioTemplate::Intersection;
  if (name == "multilane") return ScenarioTemplate::Multilane;
  if (name == "parking_lot") return ScenarioTemplate::ParkingLot;
  throw std::invalid_argument("unknown scenario template '" + std::string(name) + "'");
}

const char* to_string(ScenarioTemplate t) {
  switch (t) {
    case ScenarioTemplate::Intersection: return "intersection";
    case ScenarioTemplate::Multilane: return "multilane";
    case ScenarioTemplate::ParkingLot: return "parking_lot";
  }
  return "?";
}

std::uint64_t vehicle_seed(std::uint64_t scene_seed, std::size_t vehicle_index) {
  return splitmix64(splitmix64(scene_seed) ^ (0xA5A5A5A5ULL + vehicle_index));
}

PointCloud cast_rays(const Scene& scene, const VehicleNode& vehicle, std::uint64_t seed) {
  const LidarModel& lidar = vehicle.lidar;
  lidar.validate();
  std::vector<OrientedBox> local;
  local.reserve(scene.objects.size());
  for (const GroundTruthBox& o : scene.objects) {
    OrientedBox b = o.box;
    b.center = vehicle.pose.to_local(o.box.center);
    b.heading = normalize_angle(o.box.heading - vehicle.pose.heading());
    local.push_back(b);
  }

  // Counter-based draws: a ray's dropout depends only on (seed, ray, ring), so
  // changing what one ray hits never perturbs another ray.
  const std::uint64_t base = splitmix64(seed);
  PointCloud cloud;
  const auto rays = static_cast<std::size_t>(std::lround(2.0 * std::numbers::pi / lidar.azimuth_step));
  for (std::size_t k = 0; k < rays; ++k) {
    const double a = static_cast<double>(k) * lidar.azimuth_step;
    const Point2 dir{std::cos(a), std::sin(a)};
    double best = lidar.max_range;
    int best_id = -1;
    for (std::size_t i = 0; i < local.size(); ++i) {
      if (auto t = ray_hit({0.0, 0.0}, dir, local[i]); t && *t <= best) {
        best = *t;
        best_id = scene.objects[i].id;
      }
    }
    if (best_id < 0) continue;
    const double p = lidar.hit_probability(best);
    const unsigned rings = lidar.rings_on_target(best);
    for (unsigned r = 0; r < rings; ++r) {
      const std::uint64_t h = splitmix64(base ^ splitmix64((static_cast<std::uint64_t>(k) << 16) | r));
      if (lidar.dropout && static_cast<double>(h >> 11) * 0x1.0p-53 >= p) continue;
      cloud.points.push_back({best * dir.x, best * dir.y});
      cloud.object_ids.push_back(best_id);
    }
  }
  return cloud;
}

FeatureMap extract_features(const PointCloud& cloud, const GridSpec& spec,
                            std::size_t channels, const FeatureConfig& cfg) {
  if (channels < 1) throw std::invalid_argument("extract_features: channels must be >= 1");
  if (!(cfg.n_sat > 0.0)) throw std::invalid_argument("extract_features: n_sat must be > 0");
  std::vector<std::uint32_t> counts(spec.cell_count(), 0);
  for (const Point2& p : cloud.points) {
    if (auto cell = world_to_cell(spec, p)) ++counts[cell->row * spec.cells_x() + cell->col];
  }

  FeatureMap map(spec, channels);
  std::span<float> values = map.values();
  const double denom = std::log1p(cfg.n_sat);
  const std::size_t plane = spec.cell_count();
  for (std::size_t cell = 0; cell < plane; ++cell) {
    if (counts[cell] == 0) continue;
    const double base = std::min(1.0, std::log1p(static_cast<double>(counts[cell])) / denom);
    for (std::size_t c = 0; c < channels; ++c) {
      const std::uint64_t h = splitmix64((static_cast<std::uint64_t>(c) << 32) | cell);
      const double g = 0.5 + 0.5 * static_cast<double>(h >> 40) * 0x1.0p-24;
      values[c * plane + cell] = static_cast<float>(base * g);
    }
  }
  return map;
}

void observe(Scene& scene, const SceneConfig& cfg) {
  for (std::size_t i = 0; i < scene.vehicles.size(); ++i) {
    VehicleNode& v = scene.vehicles[i];
    v.lidar = cfg.lidar;
    v.cloud = cast_rays(scene, v, vehicle_seed(scene.seed, i));
    v.feature_map = extract_features(v.cloud, cfg.grid, cfg.features.channels, cfg.features);
    v.feature_map.set_origin_pose(v.pose);
  }
}

Scene layout_scenario(ScenarioTemplate t, std::uint64_t seed) {
  Scene scene;
  scene.name = to_string(t);
  scene.seed = seed;
  Rng rng(splitmix64(seed ^ (static_cast<std::uint64_t>(t) << 56)));
  switch (t) {
    case ScenarioTemplate::Intersection: layout_intersection(scene, rng); break;
    case ScenarioTemplate::Multilane: layout_multilane(scene, rng); break;
    case ScenarioTemplate::ParkingLot: layout_parking_lot(scene, rng); break;
  }
  return scene;
}

Scene build_scenario(ScenarioTemplate t, std::uint64_t seed, const SceneConfig& cfg) {
  Scene scene = layout_scenario(t, seed);
  observe(scene, cfg);
  return scene;
}

std::string dump_scene(const Scene& scene) {
  std::ostringstream out;
  out.precision(17);
  out << "scene " << scene.name << " seed " << scene.seed << '\n';
  for (const GroundTruthBox& o : scene.objects) {
    out << "object " << o.id << ' ' << o.box.center.x << ' ' << o.box.center.y << ' '
        << o.box.length << ' ' << o.box.width << ' ' << o.box.heading << '\n';
  }
  for (std::size_t i = 0; i < scene.vehicles.size(); ++i) {
    const VehicleNode& v = scene.vehicles[i];
    out << "vehicle " << i << ' ' << v.pose.x() << ' ' << v.pose.y() << ' ' << v.pose.heading()
        << " points " << v.cloud.size() << '\n';
  }
  return out.str();
}

}  // namespace coff
