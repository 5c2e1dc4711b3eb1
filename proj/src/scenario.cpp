#include "blinktrack/scenario.hpp"

#include "blinktrack/errors.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <mutex>
#include <tuple>
#include <cmath>
#include <numbers>
#include <random>

namespace blinktrack {

namespace {

// Independent random streams so that, e.g., adding a vehicle does not shift
// the head-motion sequence.
enum Stream : std::uint64_t { kHead = 1, kImu = 2, kDetect = 3, kBoxNoise = 4 };

std::mt19937_64 make_stream(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

struct Kinematics {
  double along = 0.0;
  double lateral = 0.0;
  double v_along = 0.0;
  double v_lateral = 0.0;
};

Kinematics vehicle_kinematics(const VehicleConfig& v, double tau) {
  Kinematics k;
  switch (v.profile) {
    case SpeedProfile::constant:
      k.along = v.speed * tau;
      k.v_along = v.speed;
      break;
    case SpeedProfile::decelerate_at: {
      const double te = v.event_time;
      if (tau <= te || v.decel <= 0.0) {
        k.along = v.speed * tau;
        k.v_along = v.speed;
        break;
      }
      const double stop = (v.speed - v.min_speed) / v.decel;
      const double dt = tau - te;
      if (dt <= stop) {
        k.along = v.speed * te + v.speed * dt - 0.5 * v.decel * dt * dt;
        k.v_along = v.speed - v.decel * dt;
      } else {
        k.along = v.speed * te + (v.speed * v.speed - v.min_speed * v.min_speed) / (2.0 * v.decel) +
                  v.min_speed * (dt - stop);
        k.v_along = v.min_speed;
      }
      break;
    }
    case SpeedProfile::lane_change_at: {
      k.along = v.speed * tau;
      k.v_along = v.speed;
      const double frac = (tau - v.event_time) / v.maneuver_duration;
      if (frac <= 0.0) {
        k.lateral = 0.0;
      } else if (frac >= 1.0) {
        k.lateral = v.lateral_shift;
      } else {
        k.lateral = v.lateral_shift * frac;
        k.v_lateral = v.lateral_shift / v.maneuver_duration;
      }
      break;
    }
  }
  return k;
}

double logistic(double range, double mid, double slope) { return 1.0 / (1.0 + std::exp((range - mid) / slope)); }

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw InvalidConfig(field + ": " + what);
}

}  // namespace

std::string_view to_string(UserMode v) {
  switch (v) {
    case UserMode::standing: return "standing";
    case UserMode::walking: return "walking";
    case UserMode::jogging: return "jogging";
  }
  return "standing";
}

std::string_view to_string(RoadType v) {
  return v == RoadType::along_road ? "along_road" : "intersection";
}

std::string_view to_string(LightCondition v) { return v == LightCondition::day ? "day" : "night"; }

std::string_view to_string(SpeedProfile v) {
  switch (v) {
    case SpeedProfile::constant: return "constant";
    case SpeedProfile::decelerate_at: return "decelerate_at";
    case SpeedProfile::lane_change_at: return "lane_change_at";
  }
  return "constant";
}

HeadMotionConfig HeadMotionConfig::for_mode(UserMode mode) {
  HeadMotionConfig h;
  switch (mode) {
    case UserMode::standing:
      h.yaw_amplitude = 0.10, h.yaw_period = 6.0, h.pitch_amplitude = 0.03, h.pitch_period = 4.0;
      break;
    case UserMode::walking:
      h.yaw_amplitude = 0.20, h.yaw_period = 5.0, h.pitch_amplitude = 0.05, h.pitch_period = 1.1;
      break;
    case UserMode::jogging:
      h.yaw_amplitude = 0.30, h.yaw_period = 4.0, h.pitch_amplitude = 0.08, h.pitch_period = 0.7;
      break;
  }
  return h;
}

std::size_t ScenarioConfig::tick_count() const {
  return static_cast<std::size_t>(std::floor(duration * tick_rate + 1e-9));
}

void ScenarioConfig::validate() const {
  require(duration > 0.0, "duration", "must be > 0");
  require(tick_rate > 0.0, "tick_rate", "must be > 0");
  require(user.speed >= 0.0, "user.speed", "must be >= 0");
  require(user.height > 0.0, "user.height", "must be > 0");
  require(head.yaw_period > 0.0, "head_motion.yaw_period", "must be > 0");
  require(head.pitch_period > 0.0, "head_motion.pitch_period", "must be > 0");
  require(head.jitter_std >= 0.0, "head_motion.jitter_std", "must be >= 0");
  require(head.imu_noise_std >= 0.0, "head_motion.imu_noise_std", "must be >= 0");
  require(std::abs(head.pitch_amplitude) + 4.0 * head.jitter_std < 0.5 * std::numbers::pi,
          "head_motion.pitch_amplitude", "pitch must stay inside (-pi/2, pi/2)");
  require(detector.fov > 0.0 && detector.fov < std::numbers::pi, "detector.fov", "must be in (0, pi)");
  require(detector.car_first_detect > 0.0, "detector.car_first_detect", "must be > 0");
  require(detector.cycle_first_detect > 0.0, "detector.cycle_first_detect", "must be > 0");
  require(detector.car_slope > 0.0, "detector.car_slope", "must be > 0");
  require(detector.cycle_slope > 0.0, "detector.cycle_slope", "must be > 0");
  require(detector.night_range_factor > 0.0 && detector.night_range_factor <= 1.0,
          "detector.night_range_factor", "must be in (0, 1]");
  require(detector.box_noise_std >= 0.0, "detector.box_noise_std", "must be >= 0");
  require(detector.image_margin >= 0.0, "detector.image_margin", "must be >= 0");
  require(detector.calibration_speed > 0.0, "detector.calibration_speed", "must be > 0");
  require(detector.calibration_tick_rate > 0.0, "detector.calibration_tick_rate", "must be > 0");
  require(detector.calibration_start > std::max(detector.car_first_detect, detector.cycle_first_detect),
          "detector.calibration_start", "must exceed the first-detection ranges");
  require(camera_height > 0.0, "camera_height", "must be > 0");
  require(despawn_range > 0.0, "despawn_range", "must be > 0");
  try {
    camera.validate();
  } catch (const std::invalid_argument& e) {
    throw InvalidConfig(std::string("camera.") + (std::string(e.what()).substr(std::string("intrinsics.").size())));
  }
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    const auto& v = vehicles[i];
    const std::string p = "vehicles[" + std::to_string(i) + "].";
    require(v.spawn_time >= 0.0 && v.spawn_time <= duration, p + "spawn_time", "must lie within the duration");
    require(v.speed >= 0.0, p + "speed", "must be >= 0");
    require(std::hypot(v.dir_x, v.dir_z) > 0.0, p + "direction", "must be non-zero");
    require(v.height >= 0.0, p + "height", "must be >= 0");
    require(v.width >= 0.0, p + "width", "must be >= 0");
    if (v.profile == SpeedProfile::decelerate_at) {
      require(v.decel > 0.0, p + "decel", "must be > 0");
      require(v.min_speed >= 0.0 && v.min_speed <= v.speed, p + "min_speed", "must be in [0, speed]");
    }
    if (v.profile == SpeedProfile::lane_change_at) {
      require(v.maneuver_duration > 0.0, p + "maneuver_duration", "must be > 0");
    }
  }
}

std::pair<double, double> class_dimensions(ObjectClass cls) {
  return cls == ObjectClass::car ? std::pair{1.5, 1.8} : std::pair{1.7, 0.7};
}

DetectorModel::DetectorModel(const DetectorConfig& config) : config_(config) {
  // Calibration is a pure function of these fields; memoize it since every
  // generated scenario builds a model.
  using Key = std::array<double, 7>;
  static std::mutex mutex;
  static std::map<Key, std::pair<double, double>> cache;
  const Key key{config.car_first_detect, config.cycle_first_detect, config.car_slope, config.cycle_slope,
                config.calibration_speed, config.calibration_start, config.calibration_tick_rate};
  {
    std::lock_guard lock(mutex);
    if (const auto it = cache.find(key); it != cache.end()) {
      std::tie(car_mid_, cycle_mid_) = it->second;
      return;
    }
  }

  auto solve = [&](ObjectClass cls, double target, double slope) {
    // survival(target) decreases monotonically as the midpoint moves out.
    double& mid = cls == ObjectClass::car ? car_mid_ : cycle_mid_;
    double lo = target - 10.0 * slope;
    double hi = config_.calibration_start + 10.0 * slope;
    for (int it = 0; it < 60; ++it) {
      mid = 0.5 * (lo + hi);
      if (survival(target, cls) > 0.5) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    mid = 0.5 * (lo + hi);
  };
  solve(ObjectClass::car, config_.car_first_detect, config_.car_slope);
  solve(ObjectClass::cycle, config_.cycle_first_detect, config_.cycle_slope);

  std::lock_guard lock(mutex);
  cache.emplace(key, std::pair{car_mid_, cycle_mid_});
}

double DetectorModel::probability(double range, ObjectClass cls, LightCondition light) const {
  if (range < 0.0) throw std::invalid_argument("detector: range must be >= 0");
  const double scaled = light == LightCondition::night ? range / config_.night_range_factor : range;
  return cls == ObjectClass::car ? logistic(scaled, car_mid_, config_.car_slope)
                                 : logistic(scaled, cycle_mid_, config_.cycle_slope);
}

double DetectorModel::survival(double range, ObjectClass cls) const {
  constexpr int kPhases = 64;
  const double step = config_.calibration_speed / config_.calibration_tick_rate;
  double total = 0.0;
  for (int ph = 0; ph < kPhases; ++ph) {
    double log_s = 0.0;
    for (double r = config_.calibration_start - (ph + 0.5) / kPhases * step; r >= range; r -= step) {
      const double p = std::min(probability(r, cls, LightCondition::day), 1.0 - 1e-15);
      log_s += std::log1p(-p);
    }
    total += std::exp(log_s);
  }
  return total / kPhases;
}

double detector_probability(double range, ObjectClass cls, LightCondition light, const DetectorConfig& config) {
  return DetectorModel(config).probability(range, cls, light);
}

GeneratedScenario generate(const ScenarioConfig& config) {
  config.validate();
  const DetectorModel detector(config.detector);
  const auto n_ticks = config.tick_count();
  const auto& intr = config.camera;

  GeneratedScenario out;
  TraceHeader header;
  header.scenario = config.name;
  header.seed = config.seed;
  header.tick_rate = config.tick_rate;
  header.duration = config.duration;
  header.intr = intr;
  header.camera_height = config.camera_height;
  header.frame_count = n_ticks;
  out.trace.header = header;
  out.truth.header = header;
  out.trace.frames.reserve(n_ticks);
  out.truth.ticks.reserve(n_ticks);

  auto head_rng = make_stream(config.seed, kHead);
  auto imu_rng = make_stream(config.seed, kImu);
  auto detect_rng = make_stream(config.seed, kDetect);
  auto noise_rng = make_stream(config.seed, kBoxNoise);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double yaw_phase = 2.0 * std::numbers::pi * unit(head_rng);
  const double pitch_phase = 2.0 * std::numbers::pi * unit(head_rng);
  const double half_fov = 0.5 * config.detector.fov;
  const double occlusion = config.detector.occlusion_deg * std::numbers::pi / 180.0;
  const double margin = config.detector.image_margin;

  struct Candidate {
    const TruthObject* object;
    double range;
    double bearing;
    BoundingBox2D box;
  };

  for (std::size_t k = 0; k < n_ticks; ++k) {
    const double t = static_cast<double>(k) / config.tick_rate;
    const auto& h = config.head;
    ImuPose pose;
    pose.yaw = h.yaw_amplitude * std::sin(2.0 * std::numbers::pi * t / h.yaw_period + yaw_phase) +
               h.jitter_std * gauss(head_rng);
    pose.pitch = h.pitch_amplitude * std::sin(2.0 * std::numbers::pi * t / h.pitch_period + pitch_phase) +
                 h.jitter_std * gauss(head_rng);
    ImuPose measured{pose.pitch + h.imu_noise_std * gauss(imu_rng), pose.yaw + h.imu_noise_std * gauss(imu_rng)};

    GroundTruthTick tick;
    tick.t = t;
    tick.true_pose = pose;
    const double user_z = -config.user.speed * t;

    for (std::size_t i = 0; i < config.vehicles.size(); ++i) {
      const auto& v = config.vehicles[i];
      const double tau = t - v.spawn_time;
      if (tau < 0.0) continue;
      const double norm = std::hypot(v.dir_x, v.dir_z);
      const double dx = v.dir_x / norm;
      const double dz = v.dir_z / norm;
      const auto kin = vehicle_kinematics(v, tau);
      // World frame coincides with the user frame at t = 0; the user walks
      // toward -z.
      const double spawn_user_z = -config.user.speed * v.spawn_time;
      const double wx = v.x + kin.along * dx - kin.lateral * dz;
      const double wz = v.z + spawn_user_z + kin.along * dz + kin.lateral * dx;
      TruthObject obj;
      obj.id = static_cast<int>(i) + 1;
      obj.cls = v.cls;
      obj.x = wx;
      obj.z = wz - user_z;
      obj.vx = kin.v_along * dx - kin.v_lateral * dz;
      obj.vz = kin.v_along * dz + kin.v_lateral * dx + config.user.speed;
      obj.height = v.height > 0.0 ? v.height : class_dimensions(v.cls).first;
      if (std::hypot(obj.x, obj.z) > config.despawn_range) continue;
      tick.objects.push_back(obj);
    }

    // Visibility: in front of the camera, inside the horizontal FOV, and
    // projecting inside the margin-extended image.
    std::vector<Candidate> candidates;
    for (const auto& obj : tick.objects) {
      const double depth = camera_depth(obj.x, obj.z, pose.yaw);
      if (depth < config.detector.min_depth) continue;
      const auto cam = user_to_camera({obj.x, 0.0, obj.z}, pose.yaw);
      const double bearing = std::atan2(cam.x, cam.z);
      if (std::abs(bearing) > half_fov) continue;
      const auto obs = project_observation(obj.x, obj.z, obj.height, pose, intr, config.camera_height);
      const auto& v = config.vehicles[obj.id - 1];
      const double width_m = v.width > 0.0 ? v.width : class_dimensions(v.cls).second;
      const double width_px = intr.fx * width_m / depth * std::cos(pose.pitch);
      const auto box = box_from_observation(obs, width_px, intr, pose.pitch, obj.cls);
      if (box.x < -margin || box.y < -margin || box.x + box.w > intr.width + margin ||
          box.bottom() > intr.height + margin) {
        continue;
      }
      candidates.push_back({&obj, std::hypot(obj.x, obj.z), bearing, box});
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.range < b.range; });

    Frame frame;
    frame.t = t;
    frame.pose = measured;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto& c = candidates[i];
      const bool hidden = std::any_of(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(i),
                                      [&](const Candidate& near) {
                                        return near.range < c.range && std::abs(near.bearing - c.bearing) < occlusion;
                                      });
      if (hidden) continue;
      if (!(unit(detect_rng) < detector.probability(c.range, c.object->cls, config.light))) continue;

      const double sigma = config.detector.box_noise_std;
      const double left = c.box.x + sigma * gauss(noise_rng);
      const double right = c.box.x + c.box.w + sigma * gauss(noise_rng);
      const double top = c.box.y + sigma * gauss(noise_rng);
      const double bottom = c.box.bottom() + sigma * gauss(noise_rng);
      const double score = 0.5 + 0.5 * unit(noise_rng);
      if (!(right > left + 1.0) || !(bottom > top + 1.0)) continue;
      frame.detections.push_back({left, top, right - left, bottom - top, c.object->cls, score});
    }
    std::sort(frame.detections.begin(), frame.detections.end(),
              [](const BoundingBox2D& a, const BoundingBox2D& b) { return a.x < b.x; });

    out.trace.frames.push_back(std::move(frame));
    out.truth.ticks.push_back(std::move(tick));
  }
  return out;
}

double first_detection_range(ObjectClass cls, LightCondition light, const DetectorConfig& detector,
                             std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.name = "first_detection";
  cfg.seed = seed;
  cfg.tick_rate = detector.calibration_tick_rate;
  cfg.duration = detector.calibration_start / detector.calibration_speed + 2.0;
  cfg.light = light;
  cfg.detector = detector;
  cfg.head = HeadMotionConfig{0.0, 1.0, 0.0, 1.0, 0.0, 0.0};

  std::mt19937_64 rng(seed);
  VehicleConfig v;
  v.cls = cls;
  v.spawn_time = std::uniform_real_distribution<double>(0.0, 1.0 / cfg.tick_rate)(rng);
  v.x = 0.0;
  v.z = detector.calibration_start;
  v.speed = detector.calibration_speed;
  cfg.vehicles.push_back(v);

  const auto gen = generate(cfg);
  for (std::size_t k = 0; k < gen.trace.frames.size(); ++k) {
    if (!gen.trace.frames[k].detections.empty()) {
      const auto& obj = gen.truth.ticks[k].objects.front();
      return std::hypot(obj.x, obj.z);
    }
  }
  return -1.0;
}

std::vector<ScenarioConfig> standard_suite(std::uint64_t base_seed, int count, double duration) {
  static constexpr UserMode kModes[] = {UserMode::standing, UserMode::walking, UserMode::jogging};
  static constexpr double kUserSpeed[] = {0.0, 1.4, 2.8};

  std::vector<ScenarioConfig> suite;
  suite.reserve(count);
  for (int i = 0; i < count; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32),
                      static_cast<std::uint32_t>(i), 0x5eedu};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double a, double b) { return a + (b - a) * unit(rng); };

    ScenarioConfig cfg;
    cfg.seed = base_seed * 1000003ULL + static_cast<std::uint64_t>(i);
    cfg.duration = duration;
    const int mode = i % 3;
    cfg.user.mode = kModes[mode];
    cfg.user.speed = kUserSpeed[mode];
    cfg.head = HeadMotionConfig::for_mode(cfg.user.mode);
    cfg.road = i % 2 == 0 ? RoadType::along_road : RoadType::intersection;
    cfg.light = i % 4 == 3 ? LightCondition::night : LightCondition::day;
    const int mix = i % 5;  // 0: cars, 1: cycles, otherwise mixed
    const int n_vehicles = 3 + (i * 7) % 6;
    const double side = unit(rng) < 0.5 ? 1.0 : -1.0;

    const double first = 5.0;
    const double slot = (duration - first - 15.0) / n_vehicles;
    for (int j = 0; j < n_vehicles; ++j) {
      VehicleConfig v;
      v.cls = mix == 0 ? ObjectClass::car
              : mix == 1 ? ObjectClass::cycle
                         : (unit(rng) < 0.7 ? ObjectClass::car : ObjectClass::cycle);
      v.spawn_time = first + j * slot + uniform(0.0, 0.6 * slot);
      v.speed = v.cls == ObjectClass::car ? uniform(6.0, 11.0) : uniform(3.0, 6.0);
      const bool crossing = cfg.road == RoadType::intersection && unit(rng) < 0.5;
      if (crossing) {
        const double from = unit(rng) < 0.5 ? 1.0 : -1.0;
        v.x = 45.0 * from;
        v.z = uniform(5.0, 15.0);
        v.dir_x = -from;
        v.dir_z = 0.0;
      } else {
        v.x = side * (v.cls == ObjectClass::car ? uniform(1.5, 4.0) : uniform(1.0, 2.0));
        v.z = 55.0;
        v.dir_x = 0.0;
        v.dir_z = -1.0;
      }
      const double profile = unit(rng);
      if (profile < 0.2) {
        v.profile = SpeedProfile::decelerate_at;
        v.event_time = uniform(2.0, 5.0);
        v.decel = uniform(2.0, 3.0);
        v.min_speed = unit(rng) < 0.5 ? 0.0 : std::min(2.0, v.speed);
      } else if (profile < 0.35 && !crossing) {
        v.profile = SpeedProfile::lane_change_at;
        v.event_time = uniform(2.0, 4.0);
        v.lateral_shift = uniform(1.0, 2.0) * (unit(rng) < 0.5 ? 1.0 : -1.0);
        v.maneuver_duration = 2.0;
      }
      cfg.vehicles.push_back(v);
    }

    cfg.name = "std" + std::to_string(i) + "_" + std::string(to_string(cfg.user.mode)) + "_" +
               std::string(to_string(cfg.road)) + "_" + std::string(to_string(cfg.light));
    suite.push_back(std::move(cfg));
  }
  return suite;
}

}  // namespace blinktrack
