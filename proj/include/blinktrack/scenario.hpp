#pragma once

#include "blinktrack/geometry.hpp"
#include "blinktrack/tracker.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace blinktrack {

enum class UserMode { standing, walking, jogging };
enum class RoadType { along_road, intersection };
enum class LightCondition { day, night };
enum class SpeedProfile { constant, decelerate_at, lane_change_at };

std::string_view to_string(UserMode v);
std::string_view to_string(RoadType v);
std::string_view to_string(LightCondition v);
std::string_view to_string(SpeedProfile v);

struct UserConfig {
  UserMode mode = UserMode::standing;
  double speed = 0.0;  // m/s, forward
  double height = 1.75;
};

struct HeadMotionConfig {
  double yaw_amplitude = 0.10;
  double yaw_period = 6.0;
  double pitch_amplitude = 0.03;
  double pitch_period = 4.0;
  double jitter_std = 0.005;
  double imu_noise_std = 0.003;

  static HeadMotionConfig for_mode(UserMode mode);
};

struct VehicleConfig {
  ObjectClass cls = ObjectClass::car;
  double spawn_time = 0.0;
  double x = 0.0;  // user frame at spawn time
  double z = 50.0;
  double dir_x = 0.0;  // travel direction in the user frame, normalized on use
  double dir_z = -1.0;
  double speed = 8.33;
  SpeedProfile profile = SpeedProfile::constant;
  double event_time = 0.0;     // seconds after spawn
  double decel = 0.0;          // decelerate_at, m/s^2
  double min_speed = 0.0;      // decelerate_at floor
  double lateral_shift = 0.0;  // lane_change_at, m (positive = left of travel)
  double maneuver_duration = 2.0;
  double height = 0.0;  // 0 = class default
  double width = 0.0;
};

struct DetectorConfig {
  double fov = 0.95;  // full horizontal field of view, rad
  double car_first_detect = 12.0;    // median first-detection range, m
  double cycle_first_detect = 6.0;
  double car_slope = 1.5;            // logistic scale, m
  double cycle_slope = 0.75;
  double night_range_factor = 0.6;
  double box_noise_std = 2.0;  // px per box edge
  double image_margin = 320.0; // boxes may extend this far outside the image
  double occlusion_deg = 3.0;
  double min_depth = 0.5;
  double calibration_speed = 8.33;
  double calibration_start = 50.0;
  double calibration_tick_rate = 10.0;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  double duration = 60.0;
  double tick_rate = 10.0;
  UserConfig user;
  HeadMotionConfig head;
  std::vector<VehicleConfig> vehicles;
  RoadType road = RoadType::along_road;
  LightCondition light = LightCondition::day;
  DetectorConfig detector;
  CameraIntrinsics camera;
  double camera_height = 1.55;
  double despawn_range = 80.0;

  std::size_t tick_count() const;
  // Throws InvalidConfig naming the offending field.
  void validate() const;
};

// Logistic per-frame detection probability whose midpoint is solved so that
// a constant-speed head-on approach has the configured median
// first-detection range.
class DetectorModel {
 public:
  explicit DetectorModel(const DetectorConfig& config);

  double probability(double range, ObjectClass cls, LightCondition light) const;
  double midpoint(ObjectClass cls) const { return cls == ObjectClass::car ? car_mid_ : cycle_mid_; }

  // Probability that an approach starting at the calibration range passes
  // `range` undetected, averaged over the frame phase.
  double survival(double range, ObjectClass cls) const;

 private:
  DetectorConfig config_;
  double car_mid_ = 0.0;
  double cycle_mid_ = 0.0;
};

double detector_probability(double range, ObjectClass cls, LightCondition light, const DetectorConfig& config);

struct TraceHeader {
  int version = 1;
  std::string scenario;
  std::uint64_t seed = 0;
  double tick_rate = 10.0;
  double duration = 0.0;
  CameraIntrinsics intr;
  double camera_height = 1.55;
  std::size_t frame_count = 0;

  friend bool operator==(const TraceHeader&, const TraceHeader&) = default;
};

struct Trace {
  TraceHeader header;
  std::vector<Frame> frames;
};

struct TruthObject {
  int id = 0;
  ObjectClass cls = ObjectClass::car;
  double x = 0.0;
  double z = 0.0;
  double vx = 0.0;
  double vz = 0.0;
  double height = 0.0;
};

struct GroundTruthTick {
  double t = 0.0;
  ImuPose true_pose;
  std::vector<TruthObject> objects;
};

struct Truth {
  TraceHeader header;
  std::vector<GroundTruthTick> ticks;
};

struct GeneratedScenario {
  Trace trace;
  Truth truth;
};

GeneratedScenario generate(const ScenarioConfig& config);

// Default physical size of an object class: {height, width} in meters.
std::pair<double, double> class_dimensions(ObjectClass cls);

// Range at which a single head-on constant-speed approach (calibration
// speed, random frame phase) is first detected; negative if never.
double first_detection_range(ObjectClass cls, LightCondition light, const DetectorConfig& detector,
                             std::uint64_t seed);

// Deterministic 20-scenario evaluation suite spanning user mode, road type,
// vehicle class mix, vehicle count and light.
std::vector<ScenarioConfig> standard_suite(std::uint64_t base_seed, int count = 20, double duration = 180.0);

}  // namespace blinktrack
