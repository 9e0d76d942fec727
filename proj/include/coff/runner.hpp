#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coff/codec.hpp"
#include "coff/fusion.hpp"
#include "coff/metrics.hpp"
#include "coff/scene.hpp"

namespace coff {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { Single, Maxout, Coff, CoffNoEnhance };

const char* to_string(Method m);
Method parse_method(const std::string& name);

struct BandwidthConfig {
  double frame_rate = 20.0;
  double link_rate_bps = 27e6;
};

struct RunConfig {
  ScenarioTemplate scenario = ScenarioTemplate::ParkingLot;
  std::vector<std::uint64_t> seeds;
  std::vector<Method> methods{Method::Single, Method::Maxout, Method::Coff, Method::CoffNoEnhance};
  WeightConfig weight;
  EnhanceConfig enhance;
  EvalConfig eval;
  SceneConfig scene;
  BandwidthConfig bandwidth;
  std::filesystem::path output_dir = "coff_out";
  unsigned workers = 1;

  void validate() const;
};

/// Parses the JSON config text. Throws ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Test seams into the per-scenario pipeline.
struct ScenarioHooks {
  std::function<void(Scene&)> after_layout;
  std::function<void(FeatureMap&)> on_sender_map;  // after decode, before fusion
};

struct MethodOutcome {
  Method method = Method::Single;
  PrecisionReport primary;    // at eval.confidence_threshold
  PrecisionReport alternate;  // at eval.alternate_confidence_threshold
  std::vector<Detection> detections;  // primary threshold
  std::optional<FusionReport> fusion;  // coff variants; map omitted
};

struct SenderLink {
  std::size_t points = 0;
  std::size_t message_bytes = 0;
  codec::BandwidthReport bandwidth;
};

struct ScenarioResult {
  std::uint64_t seed = 0;
  std::size_t objects = 0;
  std::size_t truth_in_range = 0;
  std::size_t receiver_points = 0;
  std::vector<SenderLink> links;
  std::vector<MethodOutcome> outcomes;  // RunConfig::methods order

  const MethodOutcome& outcome(Method m) const;
};

ScenarioResult run_scenario(const RunConfig& cfg, std::uint64_t seed, const ScenarioHooks& hooks = {});

struct MethodSummary {
  Method method = Method::Single;
  // Means over scenarios whose value is not vacuous; empty if none.
  std::optional<double> mean_near_precision;
  std::optional<double> mean_far_precision;
  std::optional<double> mean_near_recall;
  std::optional<double> mean_far_recall;
  CategoryStats pooled_near;
  CategoryStats pooled_far;
  CategoryStats pooled_near_alternate;
  CategoryStats pooled_far_alternate;
  std::vector<double> matched_ranges;
  std::optional<double> mean_s;
  std::optional<double> mean_x;
};

struct RunSummary {
  std::vector<ScenarioResult> scenarios;  // in seed-list order
  std::vector<MethodSummary> methods;
  double mean_points = 0.0;
  double mean_message_bytes = 0.0;

  const MethodSummary& method(Method m) const;
};

RunSummary summarize(const RunConfig& cfg, std::vector<ScenarioResult> scenarios);

/// Runs every seed on `cfg.workers` threads; output is independent of the count.
RunSummary run(const RunConfig& cfg, const ScenarioHooks& hooks = {});

/// Writes summary.csv, scenarios.csv, bandwidth.csv and the CDF files.
std::vector<std::filesystem::path> write_outputs(const RunConfig& cfg, const RunSummary& summary);

struct ExplainTrace {
  std::uint64_t seed = 0;
  std::vector<FusionStep> steps;
  double y = 1.0;
  std::map<Method, PrecisionReport> reports;
};

ExplainTrace explain(const RunConfig& cfg, std::uint64_t seed, const ScenarioHooks& hooks = {});
void print_trace(std::ostream& out, const ExplainTrace& trace);

}  // namespace coff
