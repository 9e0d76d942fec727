#include "coff/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace coff {

namespace {

using nlohmann::json;

constexpr double kDeg = std::numbers::pi / 180.0;

// Reads keys out of one JSON object and rejects anything it did not consume.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  bool get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return false;
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
    return true;
  }

  std::optional<Section> child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return std::nullopt;
    return Section(*it, path_ + "." + key);
  }

  const json* raw(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string fmt(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void check_map(const FeatureMap& map, Method m) {
  for (float v : map.values()) {
    if (!(v >= 0.0F) || !std::isfinite(v)) {
      throw std::logic_error(std::string("fused map for ") + to_string(m) +
                             " has a negative or non-finite value");
    }
  }
}

bool in_grid(const GridSpec& spec, const Pose2D& pose, Point2 world) {
  return world_to_cell(spec, pose.to_local(world)).has_value();
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::Single: return "single";
    case Method::Maxout: return "maxout";
    case Method::Coff: return "coff";
    case Method::CoffNoEnhance: return "coff_no_enhance";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "single") return Method::Single;
  if (name == "maxout") return Method::Maxout;
  if (name == "coff") return Method::Coff;
  if (name == "coff_no_enhance") return Method::CoffNoEnhance;
  throw ConfigError("unknown method '" + name + "'");
}

void RunConfig::validate() const {
  if (methods.empty()) throw ConfigError("at least one method is required");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (workers == 0) throw ConfigError("workers must be >= 1");
  try {
    weight.validate();
    enhance.validate();
    eval.validate();
    scene.lidar.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (scene.features.channels == 0 || !(scene.features.n_sat > 0.0)) {
    throw ConfigError("features: channels and n_sat must be positive");
  }
  if (!(bandwidth.frame_rate > 0.0) || !(bandwidth.link_rate_bps > 0.0)) {
    throw ConfigError("bandwidth: rates must be positive");
  }
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  RunConfig cfg;
  Section top(root, "config");

  std::string name;
  if (!top.get("template", name)) throw ConfigError("config.template is required");
  try {
    cfg.scenario = parse_template(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  if (const json* seeds = top.raw("seeds")) {
    try {
      cfg.seeds = seeds->get<std::vector<std::uint64_t>>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config.seeds: ") + e.what());
    }
  }
  std::uint64_t seed_count = 0;
  std::uint64_t first_seed = 1;
  top.get("first_seed", first_seed);
  if (top.get("seed_count", seed_count)) {
    if (!cfg.seeds.empty()) throw ConfigError("give either seeds or seed_count, not both");
    for (std::uint64_t i = 0; i < seed_count; ++i) cfg.seeds.push_back(first_seed + i);
  }

  std::vector<std::string> methods;
  if (top.get("methods", methods)) {
    cfg.methods.clear();
    for (const std::string& m : methods) cfg.methods.push_back(parse_method(m));
  }

  std::string out;
  if (top.get("output_dir", out)) cfg.output_dir = out;
  top.get("workers", cfg.workers);

  if (auto s = top.child("weight")) {
    s->get("s_low", cfg.weight.s_low);
    s->get("s_high", cfg.weight.s_high);
    s->get("c_low", cfg.weight.c_low);
    s->get("c_mid", cfg.weight.c_mid);
    s->get("x_cap", cfg.weight.x_cap);
    s->finish();
  }
  if (auto s = top.child("enhance")) {
    s->get("y", cfg.enhance.y);
    s->get("y_max", cfg.enhance.y_max);
    s->finish();
  }
  if (auto s = top.child("eval")) {
    s->get("iou_threshold", cfg.eval.iou_threshold);
    s->get("confidence_threshold", cfg.eval.confidence_threshold);
    s->get("alternate_confidence_threshold", cfg.eval.alternate_confidence_threshold);
    s->get("near_far_split", cfg.eval.near_far_split);
    if (auto d = s->child("detector")) {
      DetectorConfig& det = cfg.eval.detector;
      d->get("activation_threshold", det.activation_threshold);
      d->get("logistic_k", det.logistic_k);
      d->get("logistic_mid", det.logistic_mid);
      d->get("link_radius", det.link_radius);
      d->get("anchor_completion", det.anchor_completion);
      d->get("anchor_length", det.anchor_length);
      d->get("anchor_width", det.anchor_width);
      d->finish();
    }
    s->finish();
  }
  if (auto s = top.child("grid")) {
    const GridSpec d;
    std::vector<double> xr{d.x_range().min, d.x_range().max};
    std::vector<double> yr{d.y_range().min, d.y_range().max};
    std::vector<double> zr{d.z_range().min, d.z_range().max};
    double vx = d.voxel_x();
    double vy = d.voxel_y();
    s->get("x_range", xr);
    s->get("y_range", yr);
    s->get("z_range", zr);
    s->get("voxel_x", vx);
    s->get("voxel_y", vy);
    s->finish();
    if (xr.size() != 2 || yr.size() != 2 || zr.size() != 2) {
      throw ConfigError("config.grid: ranges are [min, max] pairs");
    }
    try {
      cfg.scene.grid = GridSpec({xr[0], xr[1]}, {yr[0], yr[1]}, {zr[0], zr[1]}, vx, vy);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config.grid: ") + e.what());
    }
  }
  if (auto s = top.child("lidar")) {
    LidarModel& l = cfg.scene.lidar;
    double az = l.azimuth_step / kDeg;
    double fov = l.vertical_fov / kDeg;
    s->get("beams", l.beams);
    s->get("azimuth_step_deg", az);
    s->get("max_range", l.max_range);
    s->get("vertical_fov_deg", fov);
    s->get("target_height", l.target_height);
    s->get("dropout", l.dropout);
    s->get("dropout_floor", l.dropout_floor);
    s->finish();
    l.azimuth_step = az * kDeg;
    l.vertical_fov = fov * kDeg;
  }
  if (auto s = top.child("features")) {
    s->get("channels", cfg.scene.features.channels);
    s->get("n_sat", cfg.scene.features.n_sat);
    s->finish();
  }
  if (auto s = top.child("bandwidth")) {
    s->get("frame_rate", cfg.bandwidth.frame_rate);
    s->get("link_rate_bps", cfg.bandwidth.link_rate_bps);
    s->finish();
  }
  top.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

const MethodOutcome& ScenarioResult::outcome(Method m) const {
  for (const MethodOutcome& o : outcomes) {
    if (o.method == m) return o;
  }
  throw std::out_of_range(std::string("method not run: ") + to_string(m));
}

const MethodSummary& RunSummary::method(Method m) const {
  for (const MethodSummary& s : methods) {
    if (s.method == m) return s;
  }
  throw std::out_of_range(std::string("method not run: ") + to_string(m));
}

ScenarioResult run_scenario(const RunConfig& cfg, std::uint64_t seed, const ScenarioHooks& hooks) {
  Scene scene = layout_scenario(cfg.scenario, seed);
  if (hooks.after_layout) hooks.after_layout(scene);
  observe(scene, cfg.scene);
  if (scene.vehicles.empty()) throw std::logic_error("scene has no receiver");

  const VehicleNode& receiver = scene.vehicles.front();
  std::vector<const VehicleNode*> senders;
  for (std::size_t i = 1; i < scene.vehicles.size(); ++i) senders.push_back(&scene.vehicles[i]);
  std::stable_sort(senders.begin(), senders.end(), [&](const VehicleNode* a, const VehicleNode* b) {
    return receiver.pose.distance_to(a->pose) < receiver.pose.distance_to(b->pose);
  });

  ScenarioResult result;
  result.seed = seed;
  result.objects = scene.objects.size();
  result.receiver_points = receiver.cloud.size();

  // Every sender map crosses the wire format before it is fused.
  std::vector<FeatureMap> sender_maps;
  for (const VehicleNode* v : senders) {
    const std::vector<std::uint8_t> bytes = codec::encode(v->feature_map, v->pose);
    codec::Decoded msg = codec::decode(bytes);
    if (hooks.on_sender_map) hooks.on_sender_map(msg.map);
    sender_maps.push_back(std::move(msg.map));
    result.links.push_back({v->cloud.size(), bytes.size(),
                            codec::bandwidth_report(v->cloud.size(), bytes.size(),
                                                    cfg.bandwidth.frame_rate,
                                                    cfg.bandwidth.link_rate_bps)});
  }

  std::vector<GroundTruthBox> truth;
  for (const GroundTruthBox& o : scene.objects) {
    if (in_grid(cfg.scene.grid, receiver.pose, o.box.center)) truth.push_back(o);
  }
  result.truth_in_range = truth.size();

  for (Method m : cfg.methods) {
    MethodOutcome outcome;
    outcome.method = m;
    FeatureMap fused;
    switch (m) {
      case Method::Single:
        fused = receiver.feature_map;
        break;
      case Method::Maxout: {
        fused = receiver.feature_map;
        for (const FeatureMap& s : sender_maps) fused = maxout_fuse(align(fused, s));
        break;
      }
      case Method::Coff:
      case Method::CoffNoEnhance: {
        EnhanceConfig e = cfg.enhance;
        if (m == Method::CoffNoEnhance) e.y = 1.0;
        FusionReport rep = coff_fuse_multi(receiver.feature_map, sender_maps, cfg.weight, e);
        fused = std::move(rep.fused);
        rep.fused = FeatureMap{};
        outcome.fusion = std::move(rep);
        break;
      }
    }
    check_map(fused, m);
    const std::vector<Detection> all = detect(fused, cfg.eval, true);
    outcome.detections = filter_by_confidence(all, cfg.eval.confidence_threshold);
    outcome.primary = evaluate(outcome.detections, truth, receiver.pose, cfg.eval);
    outcome.alternate = evaluate(filter_by_confidence(all, cfg.eval.alternate_confidence_threshold),
                                 truth, receiver.pose, cfg.eval);
    result.outcomes.push_back(std::move(outcome));
  }
  return result;
}

RunSummary summarize(const RunConfig& cfg, std::vector<ScenarioResult> scenarios) {
  RunSummary summary;
  summary.scenarios = std::move(scenarios);
  double points = 0.0;
  double bytes = 0.0;
  std::size_t links = 0;
  for (const ScenarioResult& r : summary.scenarios) {
    for (const SenderLink& l : r.links) {
      points += static_cast<double>(l.points);
      bytes += static_cast<double>(l.message_bytes);
      ++links;
    }
  }
  if (links > 0) {
    summary.mean_points = points / static_cast<double>(links);
    summary.mean_message_bytes = bytes / static_cast<double>(links);
  }

  for (Method m : cfg.methods) {
    MethodSummary ms;
    ms.method = m;
    std::vector<double> np, fp, nr, fr, s_vals, x_vals;
    for (const ScenarioResult& r : summary.scenarios) {
      const MethodOutcome& o = r.outcome(m);
      const PrecisionReport& p = o.primary;
      if (!p.near.precision_vacuous()) np.push_back(p.near_precision());
      if (!p.far.precision_vacuous()) fp.push_back(p.far_precision());
      if (!p.near.recall_vacuous()) nr.push_back(p.near_recall());
      if (!p.far.recall_vacuous()) fr.push_back(p.far_recall());
      ms.pooled_near += p.near;
      ms.pooled_far += p.far;
      ms.pooled_near_alternate += o.alternate.near;
      ms.pooled_far_alternate += o.alternate.far;
      ms.matched_ranges.insert(ms.matched_ranges.end(), p.matched_ranges.begin(), p.matched_ranges.end());
      if (o.fusion && o.fusion->s) {
        s_vals.push_back(*o.fusion->s);
        x_vals.push_back(*o.fusion->x);
      }
    }
    ms.mean_near_precision = mean_of(np);
    ms.mean_far_precision = mean_of(fp);
    ms.mean_near_recall = mean_of(nr);
    ms.mean_far_recall = mean_of(fr);
    ms.mean_s = mean_of(s_vals);
    ms.mean_x = mean_of(x_vals);
    std::sort(ms.matched_ranges.begin(), ms.matched_ranges.end());
    summary.methods.push_back(std::move(ms));
  }
  return summary;
}

RunSummary run(const RunConfig& cfg, const ScenarioHooks& hooks) {
  cfg.validate();
  std::vector<ScenarioResult> results(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
      try {
        results[i] = run_scenario(cfg, cfg.seeds[i], hooks);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cfg.seeds.size();
      }
    }
  };
  const unsigned n = std::min<std::size_t>(cfg.workers, cfg.seeds.size());
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return summarize(cfg, std::move(results));
}

std::vector<std::filesystem::path> write_outputs(const RunConfig& cfg, const RunSummary& summary) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  std::vector<fs::path> written;
  auto open = [&](const std::string& name) {
    written.push_back(cfg.output_dir / name);
    std::ofstream out(written.back(), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + written.back().string());
    return out;
  };

  {
    std::ofstream out = open("summary.csv");
    out << "method,category,confidence_threshold,mean_precision,mean_recall,pooled_precision,"
           "pooled_recall,detections,true_positives,truth,matched_truth,p90_range,max_range,mean_s,mean_x\n";
    for (const MethodSummary& ms : summary.methods) {
      const std::string p90 = ms.matched_ranges.empty() ? "" : fmt(percentile(ms.matched_ranges, 0.9));
      const std::string max = ms.matched_ranges.empty() ? "" : fmt(ms.matched_ranges.back());
      struct Row {
        const char* category;
        double threshold;
        std::optional<double> mean_p, mean_r;
        const CategoryStats* stats;
      };
      const Row rows[] = {
          {"near", cfg.eval.confidence_threshold, ms.mean_near_precision, ms.mean_near_recall, &ms.pooled_near},
          {"far", cfg.eval.confidence_threshold, ms.mean_far_precision, ms.mean_far_recall, &ms.pooled_far},
          {"near", cfg.eval.alternate_confidence_threshold, std::nullopt, std::nullopt, &ms.pooled_near_alternate},
          {"far", cfg.eval.alternate_confidence_threshold, std::nullopt, std::nullopt, &ms.pooled_far_alternate},
      };
      for (const Row& row : rows) {
        out << to_string(ms.method) << ',' << row.category << ',' << fmt(row.threshold) << ','
            << fmt(row.mean_p) << ',' << fmt(row.mean_r) << ',' << fmt(row.stats->precision()) << ','
            << fmt(row.stats->recall()) << ',' << row.stats->detections << ','
            << row.stats->true_positives << ',' << row.stats->truth << ','
            << row.stats->matched_truth << ',' << p90 << ',' << max << ',' << fmt(ms.mean_s) << ','
            << fmt(ms.mean_x) << '\n';
      }
    }
  }

  {
    std::ofstream out = open("scenarios.csv");
    out << "seed,method,objects,truth_in_range,near_precision,near_precision_vacuous,far_precision,"
           "far_precision_vacuous,near_recall,far_recall,detections,detection_range,s,x,overlap_ratio\n";
    for (const ScenarioResult& r : summary.scenarios) {
      for (const MethodOutcome& o : r.outcomes) {
        const PrecisionReport& p = o.primary;
        std::optional<double> s, x, ratio;
        if (o.fusion && !o.fusion->steps.empty()) {
          s = o.fusion->s;
          x = o.fusion->x;
          ratio = o.fusion->steps.front().overlap_ratio();
        }
        out << r.seed << ',' << to_string(o.method) << ',' << r.objects << ',' << r.truth_in_range << ','
            << fmt(p.near_precision()) << ',' << p.near.precision_vacuous() << ','
            << fmt(p.far_precision()) << ',' << p.far.precision_vacuous() << ','
            << (p.near.recall_vacuous() ? "" : fmt(p.near_recall())) << ','
            << (p.far.recall_vacuous() ? "" : fmt(p.far_recall())) << ',' << o.detections.size() << ','
            << fmt(p.detection_range) << ',' << fmt(s) << ',' << fmt(x) << ',' << fmt(ratio) << '\n';
      }
    }
  }

  {
    std::ofstream out = open("bandwidth.csv");
    out << "seed,sender,points,raw_bytes,feature_bytes,ratio,frame_rate,link_rate_bps,"
           "raw_throughput_bps,feature_throughput_bps,raw_transfer_s,feature_transfer_s\n";
    for (const ScenarioResult& r : summary.scenarios) {
      for (std::size_t i = 0; i < r.links.size(); ++i) {
        const codec::BandwidthReport& b = r.links[i].bandwidth;
        out << r.seed << ',' << i + 1 << ',' << b.points << ',' << b.raw_bytes << ',' << b.feature_bytes
            << ',' << fmt(b.ratio) << ',' << fmt(b.frame_rate) << ',' << fmt(b.link_rate_bps) << ','
            << fmt(b.raw_throughput_bps) << ',' << fmt(b.feature_throughput_bps) << ','
            << fmt(b.raw_transfer_s) << ',' << fmt(b.feature_transfer_s) << '\n';
      }
    }
  }

  const bool have_baseline =
      std::find(cfg.methods.begin(), cfg.methods.end(), Method::Maxout) != cfg.methods.end();
  for (std::size_t k = 0; k < summary.methods.size(); ++k) {
    const MethodSummary& ms = summary.methods[k];
    {
      std::ofstream out = open(std::string("cdf_range_") + to_string(ms.method) + ".csv");
      write_cdf_csv(out, range_cdf(ms.matched_ranges), "range_m");
    }
    if (!have_baseline || ms.method == Method::Maxout) continue;
    std::vector<ImprovementRecord> records;
    for (const ScenarioResult& r : summary.scenarios) {
      const CategoryStats base = r.outcome(Method::Maxout).primary.overall();
      const CategoryStats mine = r.outcome(ms.method).primary.overall();
      if (base.precision_vacuous() || mine.precision_vacuous()) continue;
      records.push_back({base.precision(), mine.precision()});
    }
    std::ofstream out = open(std::string("cdf_improvement_") + to_string(ms.method) + ".csv");
    write_cdf_csv(out, improvement_cdf(records).points, "improvement_pct");
  }
  return written;
}

ExplainTrace explain(const RunConfig& cfg, std::uint64_t seed, const ScenarioHooks& hooks) {
  RunConfig c = cfg;
  if (std::find(c.methods.begin(), c.methods.end(), Method::Coff) == c.methods.end()) {
    c.methods.push_back(Method::Coff);
  }
  const ScenarioResult r = run_scenario(c, seed, hooks);
  ExplainTrace trace;
  trace.seed = seed;
  const FusionReport& rep = *r.outcome(Method::Coff).fusion;
  trace.steps = rep.steps;
  trace.y = rep.y;
  for (const MethodOutcome& o : r.outcomes) trace.reports[o.method] = o.primary;
  return trace;
}

void print_trace(std::ostream& out, const ExplainTrace& trace) {
  out << "seed " << trace.seed << '\n';
  if (trace.steps.empty()) out << "no senders\n";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const FusionStep& s = trace.steps[i];
    out << "sender " << i + 1 << ": A_o = " << s.overlap_cells << ", A = " << s.total_cells
        << ", A_o/A = " << fmt(s.overlap_ratio()) << ", overlap bbox " << s.overlap_width << 'x'
        << s.overlap_height << '\n';
    if (!s.similarity) {
      out << "  degenerate overlap: no shared cells, receiver is only enhanced\n";
      continue;
    }
    out << "  S = " << fmt(*s.similarity) << ", branch " << to_string(*s.branch) << ", X = "
        << fmt(*s.weight) << '\n';
  }
  out << "Y = " << fmt(trace.y) << '\n';
  for (const auto& [method, rep] : trace.reports) {
    out << to_string(method) << ": near det " << rep.near.detections << " tp " << rep.near.true_positives
        << " truth " << rep.near.truth << " | far det " << rep.far.detections << " tp "
        << rep.far.true_positives << " truth " << rep.far.truth << " | range "
        << (rep.detection_range ? fmt(*rep.detection_range) : std::string("-")) << '\n';
  }
}

}  // namespace coff
