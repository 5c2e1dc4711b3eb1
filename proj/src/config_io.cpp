#include "blinktrack/config_io.hpp"

#include "blinktrack/errors.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

namespace blinktrack {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

template <typename T>
const char* expected_type() {
  if constexpr (std::is_same_v<T, bool>) {
    return "a boolean";
  } else if constexpr (std::is_integral_v<T>) {
    return "an integer";
  } else if constexpr (std::is_floating_point_v<T>) {
    return "a number";
  } else {
    return "a string";
  }
}

template <typename T>
T convert(const json& v, const std::string& path) {
  bool ok = false;
  if constexpr (std::is_same_v<T, bool>) {
    ok = v.is_boolean();
  } else if constexpr (std::is_unsigned_v<T>) {
    ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  } else if constexpr (std::is_integral_v<T>) {
    ok = v.is_number_integer();
  } else if constexpr (std::is_floating_point_v<T>) {
    ok = v.is_number();
  } else {
    ok = v.is_string();
  }
  if (!ok) throw ConfigError(path + ": expected " + expected_type<T>());
  return v.get<T>();
}

// Field reader over one JSON object that remembers which keys were consumed
// so leftovers can be reported.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError((path_.empty() ? "config" : path_) + ": expected an object");
  }

  const json* find(const std::string& key) {
    const auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  template <typename T>
  void opt(const std::string& key, T& out) {
    if (const auto* v = find(key)) out = convert<T>(*v, at(key));
  }

  template <typename T>
  void opt_list(const std::string& key, std::vector<T>& out) {
    const auto* v = find(key);
    if (!v) return;
    if (!v->is_array()) throw ConfigError(at(key) + ": expected an array");
    out.clear();
    for (std::size_t i = 0; i < v->size(); ++i) out.push_back(convert<T>((*v)[i], at(key) + "[" + std::to_string(i) + "]"));
  }

  template <typename E, std::size_t N>
  void opt_enum(const std::string& key, E& out, const std::array<E, N>& values) {
    const auto* v = find(key);
    if (!v) return;
    const auto name = convert<std::string>(*v, at(key));
    for (auto e : values) {
      if (to_string(e) == name) {
        out = e;
        return;
      }
    }
    std::string allowed;
    for (auto e : values) allowed += (allowed.empty() ? "" : ", ") + std::string(to_string(e));
    throw ConfigError(at(key) + ": unknown value '" + name + "' (expected " + allowed + ")");
  }

  std::string at(const std::string& key) const { return join(path_, key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()) + ": unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

constexpr std::array kUserModes{UserMode::standing, UserMode::walking, UserMode::jogging};
constexpr std::array kRoads{RoadType::along_road, RoadType::intersection};
constexpr std::array kLights{LightCondition::day, LightCondition::night};
constexpr std::array kProfiles{SpeedProfile::constant, SpeedProfile::decelerate_at, SpeedProfile::lane_change_at};
constexpr std::array kClasses{ObjectClass::car, ObjectClass::cycle};
constexpr std::array kSamplers{SamplerKind::every_frame, SamplerKind::interval, SamplerKind::random,
                               SamplerKind::confidence, SamplerKind::sarsa};

CameraIntrinsics intrinsics_from_json(const json& j, const std::string& path, CameraIntrinsics c) {
  Fields f(j, path);
  f.opt("fx", c.fx);
  f.opt("fy", c.fy);
  f.opt("cx", c.cx);
  f.opt("cy", c.cy);
  f.opt("width", c.width);
  f.opt("height", c.height);
  f.finish();
  return c;
}

json to_json(const CameraIntrinsics& c) {
  return {{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy}, {"width", c.width}, {"height", c.height}};
}

VehicleConfig vehicle_from_json(const json& j, const std::string& path) {
  VehicleConfig v;
  Fields f(j, path);
  f.opt_enum("class", v.cls, kClasses);
  f.opt("spawn_time", v.spawn_time);
  f.opt("x", v.x);
  f.opt("z", v.z);
  f.opt("dir_x", v.dir_x);
  f.opt("dir_z", v.dir_z);
  f.opt("speed", v.speed);
  f.opt_enum("profile", v.profile, kProfiles);
  f.opt("event_time", v.event_time);
  f.opt("decel", v.decel);
  f.opt("min_speed", v.min_speed);
  f.opt("lateral_shift", v.lateral_shift);
  f.opt("maneuver_duration", v.maneuver_duration);
  f.opt("height", v.height);
  f.opt("width", v.width);
  f.finish();
  return v;
}

json to_json(const VehicleConfig& v) {
  return {{"class", to_string(v.cls)},
          {"spawn_time", v.spawn_time},
          {"x", v.x},
          {"z", v.z},
          {"dir_x", v.dir_x},
          {"dir_z", v.dir_z},
          {"speed", v.speed},
          {"profile", to_string(v.profile)},
          {"event_time", v.event_time},
          {"decel", v.decel},
          {"min_speed", v.min_speed},
          {"lateral_shift", v.lateral_shift},
          {"maneuver_duration", v.maneuver_duration},
          {"height", v.height},
          {"width", v.width}};
}

TrackerConfig tracker_from_json(const json& j, const std::string& path, TrackerConfig c) {
  Fields f(j, path);
  f.opt("q_car", c.q_car);
  f.opt("q_cycle", c.q_cycle);
  auto fixed = [&](const char* key, auto& vec) {
    std::vector<double> values;
    f.opt_list(key, values);
    if (values.empty()) return;
    if (values.size() != static_cast<std::size_t>(vec.size())) {
      throw ConfigError(f.at(key) + ": expected " + std::to_string(vec.size()) + " numbers");
    }
    for (std::size_t i = 0; i < values.size(); ++i) vec(static_cast<Eigen::Index>(i)) = values[i];
  };
  fixed("r_diag", c.r_diag);
  fixed("p0_diag", c.p0_diag);
  f.opt("iou_gate", c.iou_gate);
  f.opt("miss_max", c.miss_max);
  f.opt("d_max", c.d_max);
  f.opt("gamma", c.gamma);
  f.opt("max_depth", c.depth.max_depth);
  f.opt("min_deviation_px", c.depth.min_deviation_px);
  f.finish();
  return c;
}

json to_json(const TrackerConfig& c) {
  return {{"q_car", c.q_car},
          {"q_cycle", c.q_cycle},
          {"r_diag", {c.r_diag(0), c.r_diag(1), c.r_diag(2)}},
          {"p0_diag", {c.p0_diag(0), c.p0_diag(1), c.p0_diag(2), c.p0_diag(3)}},
          {"iou_gate", c.iou_gate},
          {"miss_max", c.miss_max},
          {"d_max", c.d_max},
          {"gamma", c.gamma},
          {"max_depth", c.depth.max_depth},
          {"min_deviation_px", c.depth.min_deviation_px}};
}

RiskConfig risk_from_json(const json& j, const std::string& path, RiskConfig c) {
  Fields f(j, path);
  f.opt("t_r", c.t_r);
  f.opt("alert_threshold", c.alert_threshold);
  f.finish();
  return c;
}

json to_json(const RiskConfig& c) { return {{"t_r", c.t_r}, {"alert_threshold", c.alert_threshold}}; }

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (base_dir.empty() || std::filesystem::path(p).is_absolute()) return p;
  return (std::filesystem::path(base_dir) / p).string();
}

ScenarioConfig scenario_entry(const json& j, const std::string& path, const std::string& base_dir) {
  if (j.is_string()) {
    const auto file = resolve(base_dir, j.get<std::string>());
    return scenario_from_json(read_json_file(file), "");
  }
  return scenario_from_json(j, path);
}

}  // namespace

ScenarioConfig scenario_from_json(const json& j, const std::string& path) {
  ScenarioConfig c;
  Fields f(j, path);
  f.opt("name", c.name);
  f.opt("seed", c.seed);
  f.opt("duration", c.duration);
  f.opt("tick_rate", c.tick_rate);
  if (const auto* u = f.find("user")) {
    Fields uf(*u, f.at("user"));
    uf.opt_enum("mode", c.user.mode, kUserModes);
    uf.opt("speed", c.user.speed);
    uf.opt("height", c.user.height);
    uf.finish();
  }
  // Head motion defaults follow the user mode unless overridden.
  c.head = HeadMotionConfig::for_mode(c.user.mode);
  if (const auto* h = f.find("head_motion")) {
    Fields hf(*h, f.at("head_motion"));
    hf.opt("yaw_amplitude", c.head.yaw_amplitude);
    hf.opt("yaw_period", c.head.yaw_period);
    hf.opt("pitch_amplitude", c.head.pitch_amplitude);
    hf.opt("pitch_period", c.head.pitch_period);
    hf.opt("jitter_std", c.head.jitter_std);
    hf.opt("imu_noise_std", c.head.imu_noise_std);
    hf.finish();
  }
  if (const auto* vs = f.find("vehicles")) {
    if (!vs->is_array()) throw ConfigError(f.at("vehicles") + ": expected an array");
    for (std::size_t i = 0; i < vs->size(); ++i) {
      c.vehicles.push_back(vehicle_from_json((*vs)[i], f.at("vehicles") + "[" + std::to_string(i) + "]"));
    }
  }
  f.opt_enum("road", c.road, kRoads);
  f.opt_enum("light", c.light, kLights);
  if (const auto* d = f.find("detector")) {
    Fields df(*d, f.at("detector"));
    auto& det = c.detector;
    df.opt("fov", det.fov);
    df.opt("car_first_detect", det.car_first_detect);
    df.opt("cycle_first_detect", det.cycle_first_detect);
    df.opt("car_slope", det.car_slope);
    df.opt("cycle_slope", det.cycle_slope);
    df.opt("night_range_factor", det.night_range_factor);
    df.opt("box_noise_std", det.box_noise_std);
    df.opt("image_margin", det.image_margin);
    df.opt("occlusion_deg", det.occlusion_deg);
    df.opt("min_depth", det.min_depth);
    df.opt("calibration_speed", det.calibration_speed);
    df.opt("calibration_start", det.calibration_start);
    df.opt("calibration_tick_rate", det.calibration_tick_rate);
    df.finish();
  }
  if (const auto* cam = f.find("camera")) c.camera = intrinsics_from_json(*cam, f.at("camera"), c.camera);
  f.opt("camera_height", c.camera_height);
  f.opt("despawn_range", c.despawn_range);
  f.finish();
  try {
    c.validate();
  } catch (const InvalidConfig& e) {
    throw InvalidConfig(path.empty() ? e.what() : path + "." + e.what());
  }
  return c;
}

json to_json(const ScenarioConfig& c) {
  json vehicles = json::array();
  for (const auto& v : c.vehicles) vehicles.push_back(to_json(v));
  const auto& d = c.detector;
  return {{"name", c.name},
          {"seed", c.seed},
          {"duration", c.duration},
          {"tick_rate", c.tick_rate},
          {"user", {{"mode", to_string(c.user.mode)}, {"speed", c.user.speed}, {"height", c.user.height}}},
          {"head_motion",
           {{"yaw_amplitude", c.head.yaw_amplitude},
            {"yaw_period", c.head.yaw_period},
            {"pitch_amplitude", c.head.pitch_amplitude},
            {"pitch_period", c.head.pitch_period},
            {"jitter_std", c.head.jitter_std},
            {"imu_noise_std", c.head.imu_noise_std}}},
          {"vehicles", std::move(vehicles)},
          {"road", to_string(c.road)},
          {"light", to_string(c.light)},
          {"detector",
           {{"fov", d.fov},
            {"car_first_detect", d.car_first_detect},
            {"cycle_first_detect", d.cycle_first_detect},
            {"car_slope", d.car_slope},
            {"cycle_slope", d.cycle_slope},
            {"night_range_factor", d.night_range_factor},
            {"box_noise_std", d.box_noise_std},
            {"image_margin", d.image_margin},
            {"occlusion_deg", d.occlusion_deg},
            {"min_depth", d.min_depth},
            {"calibration_speed", d.calibration_speed},
            {"calibration_start", d.calibration_start},
            {"calibration_tick_rate", d.calibration_tick_rate}}},
          {"camera", to_json(c.camera)},
          {"camera_height", c.camera_height},
          {"despawn_range", c.despawn_range}};
}

SamplerConfig sampler_config_from_json(const json& j, const std::string& path, SamplerConfig c) {
  Fields f(j, path);
  f.opt("sample_cost", c.sample_cost);
  f.opt("epsilon0", c.epsilon0);
  f.opt("eta", c.eta);
  f.opt("beta", c.beta);
  f.opt("dt_max", c.dt_max);
  f.opt("learning", c.learning);
  if (const auto* b = f.find("bins")) {
    Fields bf(*b, f.at("bins"));
    bf.opt_list("confidence", c.bins.confidence);
    bf.opt_list("distance", c.bins.distance);
    bf.opt_list("elapsed", c.bins.elapsed);
    bf.finish();
  }
  f.finish();
  return c;
}

json to_json(const SamplerConfig& c) {
  return {{"sample_cost", c.sample_cost},
          {"epsilon0", c.epsilon0},
          {"eta", c.eta},
          {"beta", c.beta},
          {"dt_max", c.dt_max},
          {"learning", c.learning},
          {"bins", {{"confidence", c.bins.confidence}, {"distance", c.bins.distance}, {"elapsed", c.bins.elapsed}}}};
}

SamplerSpec sampler_spec_from_json(const json& j, const std::string& path, SamplerSpec s) {
  if (j.is_string()) {
    s.kind = sampler_kind_from_string(j.get<std::string>());
    return s;
  }
  Fields f(j, path);
  f.opt_enum("kind", s.kind, kSamplers);
  f.opt("interval_s", s.interval_s);
  f.opt("probability", s.probability);
  f.opt("c_min", s.c_min);
  if (const auto* sc = f.find("sarsa")) s.sarsa = sampler_config_from_json(*sc, f.at("sarsa"), s.sarsa);
  f.finish();
  return s;
}

json to_json(const SamplerSpec& s) {
  return {{"kind", to_string(s.kind)},
          {"interval_s", s.interval_s},
          {"probability", s.probability},
          {"c_min", s.c_min},
          {"sarsa", to_json(s.sarsa)}};
}

EvalConfig eval_config_from_json(const json& j, const std::string& path, EvalConfig c) {
  Fields f(j, path);
  if (const auto* t = f.find("tracker")) c.tracker = tracker_from_json(*t, f.at("tracker"), c.tracker);
  if (const auto* r = f.find("risk")) c.risk = risk_from_json(*r, f.at("risk"), c.risk);
  f.opt("warmup_s", c.warmup_s);
  f.opt("error_gate", c.error_gate);
  f.opt("accuracy_threshold", c.accuracy_threshold);
  f.finish();
  return c;
}

json to_json(const EvalConfig& c) {
  return {{"tracker", to_json(c.tracker)},
          {"risk", to_json(c.risk)},
          {"warmup_s", c.warmup_s},
          {"error_gate", c.error_gate},
          {"accuracy_threshold", c.accuracy_threshold}};
}

RunConfig run_config_from_json(const json& j, const std::string& base_dir) {
  RunConfig c;
  Fields f(j, "");
  f.opt("seed", c.seed);
  std::string s;
  if (f.find("trace")) {
    f.opt("trace", s);
    c.trace_path = resolve(base_dir, s);
  }
  if (f.find("truth")) {
    f.opt("truth", s);
    c.truth_path = resolve(base_dir, s);
  }
  if (const auto* sc = f.find("scenario")) c.scenario = scenario_entry(*sc, "scenario", base_dir);
  if (f.find("qtable")) {
    f.opt("qtable", s);
    c.qtable_path = resolve(base_dir, s);
  }
  f.opt("out", c.out_dir);
  if (const auto* sp = f.find("sampler")) c.sampler = sampler_spec_from_json(*sp, "sampler", c.sampler);
  if (const auto* e = f.find("eval")) c.eval = eval_config_from_json(*e, "eval", c.eval);
  f.finish();

  if (c.scenario && (c.trace_path || c.truth_path)) {
    throw ConfigError("scenario: give either a scenario or trace + truth, not both");
  }
  if (!c.scenario && !(c.trace_path && c.truth_path)) {
    throw ConfigError("trace: a run needs trace and truth paths or a scenario");
  }
  c.sampler.validate();
  c.eval.validate();
  return c;
}

json to_json(const RunConfig& c) {
  json j{{"seed", c.seed}, {"out", c.out_dir}, {"sampler", to_json(c.sampler)}, {"eval", to_json(c.eval)}};
  if (c.trace_path) j["trace"] = *c.trace_path;
  if (c.truth_path) j["truth"] = *c.truth_path;
  if (c.scenario) j["scenario"] = to_json(*c.scenario);
  if (c.qtable_path) j["qtable"] = *c.qtable_path;
  return j;
}

SuiteConfig suite_config_from_json(const json& j, const std::string& base_dir) {
  SuiteConfig c;
  Fields f(j, "");
  if (const auto* st = f.find("standard_suite")) {
    Fields sf(*st, "standard_suite");
    std::uint64_t base_seed = 1;
    int count = 20;
    double duration = 180.0;
    sf.opt("base_seed", base_seed);
    sf.opt("count", count);
    sf.opt("duration", duration);
    sf.finish();
    if (count <= 0) throw ConfigError("standard_suite.count: must be > 0");
    if (!(duration > 0.0)) throw ConfigError("standard_suite.duration: must be > 0");
    c.scenarios = standard_suite(base_seed, count, duration);
  }
  if (const auto* list = f.find("scenarios")) {
    if (!list->is_array()) throw ConfigError("scenarios: expected an array");
    for (std::size_t i = 0; i < list->size(); ++i) {
      c.scenarios.push_back(scenario_entry((*list)[i], "scenarios[" + std::to_string(i) + "]", base_dir));
    }
  }
  if (const auto* list = f.find("samplers")) {
    if (!list->is_array()) throw ConfigError("samplers: expected an array");
    for (std::size_t i = 0; i < list->size(); ++i) {
      c.samplers.push_back(sampler_spec_from_json((*list)[i], "samplers[" + std::to_string(i) + "]"));
    }
  }
  f.opt_list("seeds", c.options.seeds);
  f.opt("match_budget", c.options.match_budget);
  f.opt("workers", c.options.workers);
  std::string s;
  if (f.find("qtable")) {
    f.opt("qtable", s);
    c.qtable_path = resolve(base_dir, s);
  }
  f.opt("out", c.out_dir);
  if (const auto* e = f.find("eval")) c.eval = eval_config_from_json(*e, "eval", c.eval);
  f.finish();

  if (c.scenarios.empty()) throw ConfigError("scenarios: at least one scenario is required");
  if (c.samplers.empty()) throw ConfigError("samplers: at least one sampler is required");
  if (c.options.seeds.empty()) throw ConfigError("seeds: at least one seed is required");
  if (c.options.workers < 1) throw ConfigError("workers: must be >= 1");
  for (const auto& sp : c.samplers) sp.validate();
  c.eval.validate();
  return c;
}

json to_json(const SuiteConfig& c) {
  json scenarios = json::array();
  for (const auto& s : c.scenarios) scenarios.push_back(to_json(s));
  json samplers = json::array();
  for (const auto& s : c.samplers) samplers.push_back(to_json(s));
  json j{{"scenarios", std::move(scenarios)},
         {"samplers", std::move(samplers)},
         {"seeds", c.options.seeds},
         {"match_budget", c.options.match_budget},
         {"out", c.out_dir},
         {"eval", to_json(c.eval)}};
  if (c.qtable_path) j["qtable"] = *c.qtable_path;
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": malformed JSON: " + e.what());
  }
}

std::string config_hash(const json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace blinktrack
