#include "coff/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace coff {

namespace {

void require_congruent(const Region& a, const Region& b, const char* op) {
  if (a.channels != b.channels || a.cells != b.cells) {
    throw std::invalid_argument(std::string(op) + ": regions are not congruent");
  }
}

// Fuses the overlap of `pair` into a copy of the receiver map, unenhanced.
FeatureMap fuse_overlap(const AlignedPair& pair, double x, FusionStep& step,
                        const WeightConfig& wcfg, bool weighted) {
  step.overlap_cells = pair.overlap.area_overlap;
  step.total_cells = pair.overlap.area_total;
  step.overlap_width = pair.overlap.width;
  step.overlap_height = pair.overlap.height;
  FeatureMap out = pair.receiver;
  if (pair.overlap.area_overlap == 0) return out;

  SplitRegions split = split_regions(pair);
  if (weighted) {
    const double s = similarity(split.receiver_overlap, split.sender_overlap,
                                pair.overlap.width, pair.overlap.height);
    x = weight(s, pair.overlap.area_overlap, pair.overlap.area_total, wcfg);
    step.similarity = s;
    step.weight = x;
    step.branch = weight_branch(s, wcfg);
  }
  scatter(weighted_maxout(split.receiver_overlap, split.sender_overlap, x), out);
  return out;
}

}  // namespace

void WeightConfig::validate() const {
  if (!(s_low > 0.0 && s_low < s_high)) {
    throw std::invalid_argument("WeightConfig: need 0 < s_low < s_high");
  }
  if (!(c_low > 0.0 && c_mid > 0.0 && x_cap > 0.0)) {
    throw std::invalid_argument("WeightConfig: constants must be positive");
  }
}

void EnhanceConfig::validate() const {
  if (!(y >= 1.0) || !(y <= y_max)) {
    throw std::invalid_argument("EnhanceConfig: need 1 <= y <= y_max");
  }
}

const char* to_string(WeightBranch b) {
  switch (b) {
    case WeightBranch::Low: return "low";
    case WeightBranch::Mid: return "mid";
    case WeightBranch::Capped: return "capped";
  }
  return "?";
}

WeightBranch weight_branch(double s, const WeightConfig& cfg) {
  if (s < cfg.s_low) return WeightBranch::Low;
  if (s < cfg.s_high) return WeightBranch::Mid;
  return WeightBranch::Capped;
}

double similarity(const Region& f1, const Region& f2, std::size_t w_o, std::size_t h_o) {
  require_congruent(f1, f2, "similarity");
  if (f1.empty()) throw std::invalid_argument("similarity: empty overlap");
  if (w_o == 0 || h_o == 0) throw std::invalid_argument("similarity: zero overlap dims");
  double sum = 0.0;
  for (std::size_t i = 0; i < f1.values.size(); ++i) {
    const double d = static_cast<double>(f1.values[i]) - static_cast<double>(f2.values[i]);
    sum += d * d;
  }
  return std::sqrt(sum) / static_cast<double>(w_o * h_o);
}

double weight(double s, std::size_t a_o, std::size_t a, const WeightConfig& cfg) {
  if (a_o == 0) throw std::invalid_argument("weight: zero overlap area");
  if (a_o > a) throw std::invalid_argument("weight: overlap larger than map");
  if (!(s >= 0.0)) throw std::invalid_argument("weight: similarity must be >= 0");
  const double ratio = static_cast<double>(a_o) / static_cast<double>(a);
  switch (weight_branch(s, cfg)) {
    case WeightBranch::Low: return s / ratio + cfg.c_low;
    case WeightBranch::Mid: return s / ratio + cfg.c_mid;
    case WeightBranch::Capped: return cfg.x_cap;
  }
  return cfg.x_cap;
}

Region weighted_maxout(const Region& f1, const Region& f2, double x) {
  require_congruent(f1, f2, "weighted_maxout");
  if (!(x > 0.0)) throw std::invalid_argument("weighted_maxout: weight must be > 0");
  Region out;
  out.channels = f1.channels;
  out.cells = f1.cells;
  out.values.resize(f1.values.size());
  const auto xf = static_cast<float>(x);
  std::transform(f1.values.begin(), f1.values.end(), f2.values.begin(), out.values.begin(),
                 [xf](float a, float b) { return std::max(a, b * xf); });
  return out;
}

Region maxout_baseline(const Region& f1, const Region& f2) {
  return weighted_maxout(f1, f2, 1.0);
}

FeatureMap enhance(const FeatureMap& map, const EnhanceConfig& cfg) {
  cfg.validate();
  FeatureMap out = map;
  const auto y = static_cast<float>(cfg.y);
  for (float& v : out.values()) v *= y;
  return out;
}

Region enhance(const Region& region, const EnhanceConfig& cfg) {
  cfg.validate();
  Region out = region;
  const auto y = static_cast<float>(cfg.y);
  for (float& v : out.values) v *= y;
  return out;
}

FusionReport coff_fuse(const AlignedPair& pair, const WeightConfig& wcfg,
                       const EnhanceConfig& ecfg) {
  wcfg.validate();
  ecfg.validate();
  FusionReport report;
  FusionStep step;
  FeatureMap fused = fuse_overlap(pair, 1.0, step, wcfg, true);
  report.s = step.similarity;
  report.x = step.weight;
  report.a_o = step.overlap_cells;
  report.y = ecfg.y;
  report.steps.push_back(step);
  report.fused = enhance(fused, ecfg);
  return report;
}

FeatureMap maxout_fuse(const AlignedPair& pair) {
  FusionStep step;
  return fuse_overlap(pair, 1.0, step, WeightConfig{}, false);
}

FusionReport coff_fuse_multi(const FeatureMap& receiver,
                             const std::vector<FeatureMap>& senders,
                             const WeightConfig& wcfg, const EnhanceConfig& ecfg) {
  wcfg.validate();
  ecfg.validate();
  const Pose2D& home = receiver.origin_pose();
  for (std::size_t i = 1; i < senders.size(); ++i) {
    if (home.distance_to(senders[i].origin_pose()) <
        home.distance_to(senders[i - 1].origin_pose())) {
      throw std::invalid_argument("coff_fuse_multi: senders must be sorted nearest-first");
    }
  }
  FusionReport report;
  report.y = ecfg.y;
  FeatureMap running = receiver;
  for (const FeatureMap& sender : senders) {
    FusionStep step;
    running = fuse_overlap(align(running, sender), 1.0, step, wcfg, true);
    report.steps.push_back(step);
  }
  if (!report.steps.empty()) {
    report.s = report.steps.front().similarity;
    report.x = report.steps.front().weight;
    report.a_o = report.steps.front().overlap_cells;
  }
  report.fused = enhance(running, ecfg);
  return report;
}

}  // namespace coff
