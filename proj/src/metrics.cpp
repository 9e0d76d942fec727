#include "coff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <deque>
#include <ostream>
#include <stdexcept>

namespace coff {

namespace {

Detection make_detection(const FeatureMap& map, const std::vector<std::size_t>& cells,
                         const std::vector<float>& activation, const DetectorConfig& cfg) {
  const GridSpec& spec = map.spec();
  const std::size_t w = map.width();
  std::size_t row_lo = map.height(), row_hi = 0, col_lo = w, col_hi = 0;
  double sum = 0.0;
  for (std::size_t cell : cells) {
    row_lo = std::min(row_lo, cell / w);
    row_hi = std::max(row_hi, cell / w);
    col_lo = std::min(col_lo, cell % w);
    col_hi = std::max(col_hi, cell % w);
    sum += activation[cell];
  }
  Detection det;
  det.cells = cells.size();
  det.box = {spec.x_range().min + static_cast<double>(col_lo) * spec.voxel_x(),
             spec.y_range().min + static_cast<double>(row_lo) * spec.voxel_y(),
             spec.x_range().min + static_cast<double>(col_hi + 1) * spec.voxel_x(),
             spec.y_range().min + static_cast<double>(row_hi + 1) * spec.voxel_y()};

  if (cfg.anchor_completion) {
    AxisBox& b = det.box;
    const double slack = cfg.anchor_width + std::max(spec.voxel_x(), spec.voxel_y());
    const bool along_y = b.height() > b.width() && b.height() > slack;
    const double want_x = along_y ? cfg.anchor_width : cfg.anchor_length;
    const double want_y = along_y ? cfg.anchor_length : cfg.anchor_width;
    const Point2 c = b.center();
    if (b.width() < want_x) {
      if (c.x >= 0.0) b.x_max = b.x_min + want_x;
      else b.x_min = b.x_max - want_x;
    }
    if (b.height() < want_y) {
      if (c.y >= 0.0) b.y_max = b.y_min + want_y;
      else b.y_min = b.y_max - want_y;
    }
  }

  det.mean_activation = sum / static_cast<double>(cells.size());
  det.confidence = logistic(cfg.logistic_k * (det.mean_activation - cfg.logistic_mid));
  return det;
}

std::vector<float> activation_grid(const FeatureMap& map) {
  std::vector<float> act(map.plane_size());
  for (std::size_t i = 0; i < act.size(); ++i) act[i] = map.channel_max(i);
  return act;
}

std::vector<std::vector<std::size_t>> components_of(const std::vector<float>& act,
                                                    std::size_t h, std::size_t w,
                                                    const DetectorConfig& cfg) {
  std::vector<std::uint8_t> seen(act.size(), 0);
  std::vector<std::vector<std::size_t>> out;
  const long r = std::max(cfg.link_radius, 0);
  const auto lh = static_cast<long>(h);
  const auto lw = static_cast<long>(w);
  for (std::size_t start = 0; start < act.size(); ++start) {
    if (seen[start] || !(act[start] >= cfg.activation_threshold)) continue;
    std::vector<std::size_t> comp;
    std::deque<std::size_t> queue{start};
    seen[start] = 1;
    while (!queue.empty()) {
      const std::size_t cur = queue.front();
      queue.pop_front();
      comp.push_back(cur);
      const long cr = static_cast<long>(cur / w);
      const long cc = static_cast<long>(cur % w);
      const long span = std::max(r, 1L);
      for (long dr = -span; dr <= span; ++dr) {
        for (long dc = -span; dc <= span; ++dc) {
          if (dr == 0 && dc == 0) continue;
          if (r == 0 && std::abs(dr) + std::abs(dc) != 1) continue;
          const long nr = cr + dr;
          const long nc = cc + dc;
          if (nr < 0 || nc < 0 || nr >= lh || nc >= lw) continue;
          const auto n = static_cast<std::size_t>(nr * lw + nc);
          if (seen[n] || !(act[n] >= cfg.activation_threshold)) continue;
          seen[n] = 1;
          queue.push_back(n);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

bool detection_order(const Detection& a, const Detection& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  if (a.box.x_min != b.box.x_min) return a.box.x_min < b.box.x_min;
  return a.box.y_min < b.box.y_min;
}

}  // namespace

void EvalConfig::validate() const {
  auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!in_unit(iou_threshold) || !in_unit(confidence_threshold) ||
      !in_unit(alternate_confidence_threshold)) {
    throw std::invalid_argument("EvalConfig: thresholds must lie in (0, 1)");
  }
  if (!(near_far_split > 0.0)) throw std::invalid_argument("EvalConfig: split must be > 0");
  if (detector.link_radius < 0) throw std::invalid_argument("EvalConfig: link_radius must be >= 0");
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<std::vector<std::size_t>> activation_components(const FeatureMap& map,
                                                            const DetectorConfig& cfg) {
  return components_of(activation_grid(map), map.height(), map.width(), cfg);
}

std::vector<Detection> detect(const FeatureMap& map, const EvalConfig& cfg, bool keep_all) {
  const std::vector<float> act = activation_grid(map);
  std::vector<Detection> dets;
  for (const auto& comp : components_of(act, map.height(), map.width(), cfg.detector)) {
    Detection det = make_detection(map, comp, act, cfg.detector);
    if (keep_all || det.confidence >= cfg.confidence_threshold) dets.push_back(det);
  }
  std::sort(dets.begin(), dets.end(), detection_order);
  return dets;
}

std::vector<Detection> filter_by_confidence(const std::vector<Detection>& dets, double threshold) {
  std::vector<Detection> out;
  std::copy_if(dets.begin(), dets.end(), std::back_inserter(out),
               [threshold](const Detection& d) { return d.confidence >= threshold; });
  return out;
}

MatchResult match(const std::vector<Detection>& dets, const std::vector<AxisBox>& truth,
                  const EvalConfig& cfg) {
  std::vector<std::size_t> order(dets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].confidence > dets[b].confidence;
  });

  MatchResult result;
  std::vector<std::uint8_t> taken(truth.size(), 0);
  for (std::size_t d : order) {
    double best = 0.0;
    std::optional<std::size_t> best_truth;
    for (std::size_t t = 0; t < truth.size(); ++t) {
      if (taken[t]) continue;
      const double v = iou(dets[d].box, truth[t]);
      if (v >= cfg.iou_threshold && v > best) {
        best = v;
        best_truth = t;
      }
    }
    if (best_truth) {
      taken[*best_truth] = 1;
      result.matches.push_back({d, *best_truth, best});
    } else {
      result.unmatched_detections.push_back(d);
    }
  }
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (!taken[t]) result.unmatched_truth.push_back(t);
  }
  return result;
}

double CategoryStats::precision() const {
  return detections == 0 ? 1.0
                         : static_cast<double>(true_positives) / static_cast<double>(detections);
}

double CategoryStats::recall() const {
  return truth == 0 ? 0.0 : static_cast<double>(matched_truth) / static_cast<double>(truth);
}

CategoryStats& CategoryStats::operator+=(const CategoryStats& o) {
  detections += o.detections;
  true_positives += o.true_positives;
  truth += o.truth;
  matched_truth += o.matched_truth;
  return *this;
}

CategoryStats PrecisionReport::overall() const {
  CategoryStats all = near;
  all += far;
  return all;
}

PrecisionReport evaluate(const std::vector<Detection>& dets,
                         const std::vector<GroundTruthBox>& truth,
                         const Pose2D& receiver_pose, const EvalConfig& cfg) {
  std::vector<AxisBox> local;
  std::vector<double> range;
  local.reserve(truth.size());
  for (const GroundTruthBox& t : truth) {
    local.push_back(t.box.bounds_in(receiver_pose));
    range.push_back(std::hypot(t.box.center.x - receiver_pose.x(), t.box.center.y - receiver_pose.y()));
  }
  auto is_near = [&](double d) { return d < cfg.near_far_split; };

  PrecisionReport report;
  for (double d : range) ++(is_near(d) ? report.near : report.far).truth;

  const MatchResult m = match(dets, local, cfg);
  for (const MatchResult::Pair& p : m.matches) {
    CategoryStats& cat = is_near(range[p.truth]) ? report.near : report.far;
    ++cat.detections;
    ++cat.true_positives;
    ++cat.matched_truth;
    report.matched_ranges.push_back(range[p.truth]);
  }
  for (std::size_t d : m.unmatched_detections) {
    const Point2 c = dets[d].box.center();
    ++(is_near(std::hypot(c.x, c.y)) ? report.near : report.far).detections;
  }
  std::sort(report.matched_ranges.begin(), report.matched_ranges.end());
  if (!report.matched_ranges.empty()) report.detection_range = report.matched_ranges.back();
  return report;
}

std::vector<CdfPoint> empirical_cdf(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  std::vector<CdfPoint> cdf;
  const auto n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
    cdf.push_back({samples[i], static_cast<double>(i + 1) / n});
  }
  return cdf;
}

ImprovementCdf improvement_cdf(const std::vector<ImprovementRecord>& records) {
  ImprovementCdf out;
  std::vector<double> gains;
  for (const ImprovementRecord& r : records) {
    if (!(r.baseline > 0.0)) {
      ++out.excluded_zero_baseline;
      continue;
    }
    gains.push_back((r.method - r.baseline) / r.baseline * 100.0);
  }
  out.points = empirical_cdf(std::move(gains));
  return out;
}

std::vector<CdfPoint> range_cdf(std::vector<double> ranges) {
  return empirical_cdf(std::move(ranges));
}

double percentile(std::vector<double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("percentile: no samples");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  const auto rank = static_cast<std::size_t>(std::ceil(std::clamp(q, 0.0, 1.0) * n));
  return samples[rank == 0 ? 0 : rank - 1];
}

void write_cdf_csv(std::ostream& out, const std::vector<CdfPoint>& cdf, const char* value_name) {
  out << value_name << ",cumulative_fraction\n";
  char buf[64];
  for (const CdfPoint& p : cdf) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f\n", p.value, p.cumulative);
    out << buf;
  }
}

}  // namespace coff
