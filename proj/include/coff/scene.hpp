#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "coff/geometry.hpp"
#include "coff/grid.hpp"

namespace coff {

struct GroundTruthBox {
  int id = 0;
  OrientedBox box;
};

/// BEV LiDAR. Each azimuth ray stops at its nearest box; a hit contributes one
/// point per beam ring that lands on a target of `target_height` at that
/// range, each kept with probability p(d) = clamp(1 - d / max_range, floor, 1).
struct LidarModel {
  unsigned beams = 16;
  double azimuth_step = 0.2 * 3.14159265358979323846 / 180.0;
  double max_range = 100.0;
  double vertical_fov = 30.0 * 3.14159265358979323846 / 180.0;
  double target_height = 1.5;
  bool dropout = true;
  double dropout_floor = 0.05;

  void validate() const;
  double hit_probability(double range) const;
  unsigned rings_on_target(double range) const;
};

struct PointCloud {
  std::vector<Point2> points;  // sensor-local frame
  std::vector<int> object_ids;  // parallel to points

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  std::size_t count_for(int object_id) const;
};

struct VehicleNode {
  Pose2D pose;
  LidarModel lidar;
  PointCloud cloud;
  FeatureMap feature_map;
};

enum class ScenarioTemplate { Intersection, Multilane, ParkingLot };

ScenarioTemplate parse_template(std::string_view name);
const char* to_string(ScenarioTemplate t);

/// Vehicle 0 is the receiver; the rest are senders.
struct Scene {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<GroundTruthBox> objects;
  std::vector<VehicleNode> vehicles;
};

struct FeatureConfig {
  std::size_t channels = FeatureMap::kDefaultChannels;
  double n_sat = 20.0;
};

struct SceneConfig {
  GridSpec grid;
  LidarModel lidar;
  FeatureConfig features;
};

PointCloud cast_rays(const Scene& scene, const VehicleNode& vehicle, std::uint64_t seed);

/// Density stand-in for a learned extractor: log-saturating point count per
/// cell, modulated per channel by a fixed hash in [0.5, 1). Empty cells are 0.
FeatureMap extract_features(const PointCloud& cloud, const GridSpec& spec,
                            std::size_t channels, const FeatureConfig& cfg = {});

/// Casts rays and extracts features for every vehicle in the scene.
void observe(Scene& scene, const SceneConfig& cfg);

/// Object and vehicle placement only; clouds and maps are left empty.
Scene layout_scenario(ScenarioTemplate t, std::uint64_t seed);

/// layout_scenario followed by observe.
Scene build_scenario(ScenarioTemplate t, std::uint64_t seed, const SceneConfig& cfg = {});

/// Line-oriented text dump for debugging.
std::string dump_scene(const Scene& scene);

/// Seed for a vehicle's ray cast, derived from the scene seed.
std::uint64_t vehicle_seed(std::uint64_t scene_seed, std::size_t vehicle_index);

}  // namespace coff
