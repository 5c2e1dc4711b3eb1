#pragma once

#include "blinktrack/assignment.hpp"
#include "blinktrack/ekf.hpp"
#include "blinktrack/geometry.hpp"

#include <optional>
#include <span>
#include <vector>

namespace blinktrack {

struct TrackerConfig {
  CameraIntrinsics intr;
  double camera_height = 1.55;
  DepthLimits depth;
  double q_car = 2.0;    // m^2/s^3
  double q_cycle = 1.0;  // m^2/s^3
  Eigen::Vector3d r_diag{16.0, 9.0, 9.0};          // px^2
  Eigen::Vector4d p0_diag{4.0, 4.0, 16.0, 16.0};   // m^2, m^2/s^2
  double iou_gate = 0.1;
  int miss_max = 3;
  double d_max = 30.0;
  double gamma = 1e-6;

  double process_noise_density(ObjectClass cls) const { return cls == ObjectClass::car ? q_car : q_cycle; }
  Eigen::Matrix3d measurement_noise() const { return r_diag.asDiagonal(); }
  void validate() const;
};

// One blink: detections from a single frame plus the IMU pose at capture.
struct Frame {
  double t = 0.0;
  ImuPose pose;
  std::vector<BoundingBox2D> detections;
};

struct Track {
  int id = 0;
  TrackState state;
  ObjectClass cls = ObjectClass::car;
  double obj_height = 1.5;
  double confidence = 0.0;
  int miss_count = 0;
  double last_update = 0.0;
  BoundingBox2D last_box;
  int height_samples = 0;

  double range() const;
};

// Read-only view of a track handed to samplers, risk and evaluation.
struct TrackSnapshot {
  int id = 0;
  ObjectClass cls = ObjectClass::car;
  double x = 0.0;
  double z = 0.0;
  double vx = 0.0;
  double vz = 0.0;
  double confidence = 0.0;
  double range = 0.0;
  int miss_count = 0;
};

Track predict(const Track& track, double dt, double q, double gamma);

// EKF correction with a pixel observation. Throws SingularInnovation or
// BehindCamera when the correction cannot be applied.
Track update(const Track& track, const ObservationVector& obs, const ImuPose& pose,
             const CameraIntrinsics& intr, double camera_height, const Eigen::Matrix3d& noise,
             double gamma);

// Image box of the track's current state: projected bottom-center and
// height, last observed aspect ratio. Empty when the track is behind the
// camera.
std::optional<BoundingBox2D> predicted_box(const Track& track, const ImuPose& pose,
                                           const CameraIntrinsics& intr, double camera_height);

Assignment match(std::span<const Track> tracks, std::span<const BoundingBox2D> detections,
                 const ImuPose& pose, const CameraIntrinsics& intr, double camera_height,
                 double iou_gate);

struct StepStats {
  int matched = 0;
  int spawned = 0;
  int dropped = 0;
  int rejected_detections = 0;
  int failed_updates = 0;
};

class Tracker {
 public:
  explicit Tracker(TrackerConfig config = {});

  // Predicts every track forward to `now` without consuming a frame.
  void advance(double now);

  // Full blink pipeline: predict, associate, correct, spawn, age, prune.
  std::vector<TrackSnapshot> step(const Frame& frame);

  std::vector<TrackSnapshot> snapshots() const;
  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return config_; }
  const StepStats& last_stats() const { return stats_; }
  double time() const { return time_; }

 private:
  void spawn(const BoundingBox2D& box, const Frame& frame);

  TrackerConfig config_;
  std::vector<Track> tracks_;  // ascending id
  int next_id_ = 1;
  double time_ = 0.0;
  std::optional<double> last_frame_t_;
  StepStats stats_;
};

TrackSnapshot snapshot_of(const Track& track);

}  // namespace blinktrack
