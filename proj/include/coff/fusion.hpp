#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "coff/alignment.hpp"
#include "coff/grid.hpp"

namespace coff {

/// Piecewise weight constants:
///   X = S / (A_o/A) + c_low   if S < s_low
///   X = S / (A_o/A) + c_mid   if s_low <= S < s_high
///   X = x_cap                 if S >= s_high
struct WeightConfig {
  double s_low = 0.15;
  double s_high = 0.3;
  double c_low = 1.2;
  double c_mid = 1.5;
  double x_cap = 1.8;

  void validate() const;
};

struct EnhanceConfig {
  double y = 2.0;
  double y_max = 5.0;

  void validate() const;
};

enum class WeightBranch { Low, Mid, Capped };

const char* to_string(WeightBranch b);

WeightBranch weight_branch(double s, const WeightConfig& cfg = {});

/// One sender's contribution. `similarity` and `weight` are empty when the
/// sender's footprint does not overlap the receiver grid.
struct FusionStep {
  std::optional<double> similarity;
  std::optional<double> weight;
  std::optional<WeightBranch> branch;
  std::size_t overlap_cells = 0;
  std::size_t total_cells = 0;
  std::size_t overlap_width = 0;
  std::size_t overlap_height = 0;

  double overlap_ratio() const {
    return total_cells == 0 ? 0.0
                            : static_cast<double>(overlap_cells) / static_cast<double>(total_cells);
  }
};

struct FusionReport {
  std::optional<double> s;  // of the first (nearest) sender
  std::optional<double> x;
  std::size_t a_o = 0;
  double y = 1.0;
  std::vector<FusionStep> steps;
  FeatureMap fused;

  bool degenerate() const { return !s.has_value(); }
};

/// Euclidean distance over every channel and overlap cell, divided by the
/// overlap's bounding width * height. Accumulates in double, in cell order.
double similarity(const Region& f1, const Region& f2, std::size_t w_o, std::size_t h_o);

double weight(double s, std::size_t a_o, std::size_t a, const WeightConfig& cfg = {});

/// Elementwise max(f1, x * f2) over congruent regions.
Region weighted_maxout(const Region& f1, const Region& f2, double x);

/// Plain elementwise max; identical to weighted_maxout with x = 1.
Region maxout_baseline(const Region& f1, const Region& f2);

FeatureMap enhance(const FeatureMap& map, const EnhanceConfig& cfg);
Region enhance(const Region& region, const EnhanceConfig& cfg);

/// Receiver-only cells pass through; overlap cells take max(F1, X * F2);
/// the whole result is then scaled by Y. With no overlap this reduces to
/// enhancing the receiver map.
FusionReport coff_fuse(const AlignedPair& pair, const WeightConfig& wcfg = {},
                       const EnhanceConfig& ecfg = {});

/// Plain maxout in the overlap, receiver values elsewhere, no enhancement.
FeatureMap maxout_fuse(const AlignedPair& pair);

/// Folds senders into the receiver nearest-first, each step unenhanced, then
/// enhances once. `senders` must be sorted by distance from the receiver.
FusionReport coff_fuse_multi(const FeatureMap& receiver,
                             const std::vector<FeatureMap>& senders,
                             const WeightConfig& wcfg = {},
                             const EnhanceConfig& ecfg = {});

}  // namespace coff
