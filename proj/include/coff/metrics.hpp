#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "coff/geometry.hpp"
#include "coff/grid.hpp"
#include "coff/scene.hpp"

namespace coff {

/// Threshold-plus-components stand-in for a region proposal network.
struct DetectorConfig {
  float activation_threshold = 0.25F;
  double logistic_k = 6.0;
  double logistic_mid = 0.5;
  /// 0 links 4-neighbours only; r >= 1 links cells within Chebyshev distance r.
  int link_radius = 2;
  /// Grow undersized clusters to the nominal vehicle footprint, keeping the
  /// edges nearest the map origin fixed.
  bool anchor_completion = true;
  double anchor_length = 4.5;
  double anchor_width = 1.8;
};

struct EvalConfig {
  double iou_threshold = 0.5;
  double confidence_threshold = 0.5;
  double alternate_confidence_threshold = 0.3;
  double near_far_split = 20.0;
  DetectorConfig detector;

  void validate() const;
};

/// Box in the feature map's local frame.
struct Detection {
  AxisBox box;
  double confidence = 0.0;
  double mean_activation = 0.0;
  std::size_t cells = 0;
};

double logistic(double z);

/// Connected regions of the channel-max activation, thresholded, sorted by
/// descending confidence (ties by box position). Ignores confidence_threshold
/// when `keep_all` is set.
std::vector<Detection> detect(const FeatureMap& map, const EvalConfig& cfg, bool keep_all = false);

/// Components of the activation superlevel set as sorted flat cell lists.
std::vector<std::vector<std::size_t>> activation_components(const FeatureMap& map,
                                                            const DetectorConfig& cfg);

std::vector<Detection> filter_by_confidence(const std::vector<Detection>& dets, double threshold);

struct MatchResult {
  struct Pair {
    std::size_t detection = 0;
    std::size_t truth = 0;
    double iou = 0.0;
  };
  std::vector<Pair> matches;
  std::vector<std::size_t> unmatched_detections;
  std::vector<std::size_t> unmatched_truth;
};

/// Greedy one-to-one matching in descending confidence order.
MatchResult match(const std::vector<Detection>& dets, const std::vector<AxisBox>& truth,
                  const EvalConfig& cfg);

struct CategoryStats {
  std::size_t detections = 0;
  std::size_t true_positives = 0;
  std::size_t truth = 0;
  std::size_t matched_truth = 0;

  /// 1.0 with `precision_vacuous()` set when there are no detections.
  double precision() const;
  bool precision_vacuous() const { return detections == 0; }
  /// 0.0 with `recall_vacuous()` set when there is no ground truth.
  double recall() const;
  bool recall_vacuous() const { return truth == 0; }

  CategoryStats& operator+=(const CategoryStats& o);
};

struct PrecisionReport {
  CategoryStats near;
  CategoryStats far;
  std::vector<double> matched_ranges;  // truth-center distance, ascending
  std::optional<double> detection_range;

  double near_precision() const { return near.precision(); }
  double far_precision() const { return far.precision(); }
  double near_recall() const { return near.recall(); }
  double far_recall() const { return far.recall(); }
  CategoryStats overall() const;
};

/// `truth` is in world coordinates; it is mapped into the receiver frame
/// before matching against the (receiver-frame) detections.
PrecisionReport evaluate(const std::vector<Detection>& dets,
                         const std::vector<GroundTruthBox>& truth,
                         const Pose2D& receiver_pose, const EvalConfig& cfg);

struct CdfPoint {
  double value = 0.0;
  double cumulative = 0.0;
};

struct ImprovementRecord {
  double baseline = 0.0;
  double method = 0.0;
};

struct ImprovementCdf {
  std::vector<CdfPoint> points;
  std::size_t excluded_zero_baseline = 0;
};

/// Percent improvement per record, as an empirical CDF. Records with a zero
/// baseline are counted in `excluded_zero_baseline` and skipped.
ImprovementCdf improvement_cdf(const std::vector<ImprovementRecord>& records);

std::vector<CdfPoint> range_cdf(std::vector<double> ranges);

/// Empirical CDF: one point per sample, sorted ascending, cumulative i/n.
std::vector<CdfPoint> empirical_cdf(std::vector<double> samples);

/// Nearest-rank percentile, q in [0, 1].
double percentile(std::vector<double> samples, double q);

void write_cdf_csv(std::ostream& out, const std::vector<CdfPoint>& cdf, const char* value_name);

}  // namespace coff
