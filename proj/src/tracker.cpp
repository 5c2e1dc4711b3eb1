#include "blinktrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace blinktrack {

void TrackerConfig::validate() const {
  intr.validate();
  if (!(camera_height > 0.0)) throw std::invalid_argument("tracker.camera_height: must be > 0");
  if (!(q_car >= 0.0) || !(q_cycle >= 0.0)) throw std::invalid_argument("tracker.q: must be >= 0");
  if (!(r_diag.minCoeff() > 0.0)) throw std::invalid_argument("tracker.r: must be > 0");
  if (!(p0_diag.minCoeff() > 0.0)) throw std::invalid_argument("tracker.p0: must be > 0");
  if (!(iou_gate >= 0.0 && iou_gate <= 1.0)) throw std::invalid_argument("tracker.iou_gate: must be in [0,1]");
  if (miss_max < 0) throw std::invalid_argument("tracker.miss_max: must be >= 0");
  if (!(d_max > 0.0)) throw std::invalid_argument("tracker.d_max: must be > 0");
  if (!(gamma > 0.0)) throw std::invalid_argument("tracker.gamma: must be > 0");
}

double Track::range() const { return std::hypot(state.mean(0), state.mean(1)); }

TrackSnapshot snapshot_of(const Track& track) {
  const auto& m = track.state.mean;
  return {track.id, track.cls, m(0), m(1), m(2), m(3), track.confidence, track.range(), track.miss_count};
}

Track predict(const Track& track, double dt, double q, double gamma) {
  Track out = track;
  out.state = predict_state(track.state, dt, q);
  out.confidence = confidence(out.state.cov, gamma);
  return out;
}

Track update(const Track& track, const ObservationVector& obs, const ImuPose& pose,
             const CameraIntrinsics& intr, double camera_height, const Eigen::Matrix3d& noise,
             double gamma) {
  const PixelObservationModel model{pose, intr, camera_height, track.obj_height};
  Track out = track;
  out.state = ekf_update(track.state, obs.as_vector(), model, noise);
  out.confidence = confidence(out.state.cov, gamma);

  // Height is a per-object constant: running mean of h_e * h / dy, which
  // needs no depth estimate.
  if (obs.horizon_deviation > 0.0) {
    const double sample = camera_height * obs.pixel_height / obs.horizon_deviation;
    out.height_samples = track.height_samples + 1;
    out.obj_height += (sample - track.obj_height) / out.height_samples;
  }
  return out;
}

std::optional<BoundingBox2D> predicted_box(const Track& track, const ImuPose& pose,
                                           const CameraIntrinsics& intr, double camera_height) {
  const auto& m = track.state.mean;
  if (!(camera_depth(m(0), m(1), pose.yaw) > 0.0)) return std::nullopt;
  const auto obs = project_observation(m(0), m(1), track.obj_height, pose, intr, camera_height);
  const double aspect = track.last_box.h > 0.0 ? track.last_box.w / track.last_box.h : 1.0;
  return box_from_observation(obs, aspect * obs.pixel_height, intr, pose.pitch, track.cls);
}

Assignment match(std::span<const Track> tracks, std::span<const BoundingBox2D> detections,
                 const ImuPose& pose, const CameraIntrinsics& intr, double camera_height,
                 double iou_gate) {
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(tracks.size(), detections.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const auto box = predicted_box(tracks[i], pose, intr, camera_height);
    if (!box) continue;
    for (std::size_t j = 0; j < detections.size(); ++j) {
      weights(i, j) = iou(*box, detections[j]);
    }
  }
  const auto matching = max_weight_matching(weights, iou_gate);

  Assignment out;
  std::vector<char> det_used(detections.size(), 0);
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const int j = matching.row_to_col[i];
    if (j >= 0) {
      out.pairs.emplace_back(tracks[i].id, j);
      det_used[j] = 1;
    } else {
      out.unmatched_tracks.push_back(tracks[i].id);
    }
  }
  for (std::size_t j = 0; j < detections.size(); ++j) {
    if (!det_used[j]) out.unmatched_detections.push_back(static_cast<int>(j));
  }
  return out;
}

Tracker::Tracker(TrackerConfig config) : config_(std::move(config)) { config_.validate(); }

void Tracker::advance(double now) {
  if (now < time_) throw std::invalid_argument("tracker: time moved backwards");
  const double dt = now - time_;
  for (auto& track : tracks_) {
    track = predict(track, dt, config_.process_noise_density(track.cls), config_.gamma);
  }
  time_ = now;
}

std::vector<TrackSnapshot> Tracker::step(const Frame& frame) {
  if (last_frame_t_ && !(frame.t > *last_frame_t_)) {
    throw std::invalid_argument("tracker: frame timestamps must be strictly increasing");
  }
  last_frame_t_ = frame.t;
  stats_ = {};
  advance(std::max(frame.t, time_));

  const auto assignment =
      match(tracks_, frame.detections, frame.pose, config_.intr, config_.camera_height, config_.iou_gate);

  std::vector<char> matched(tracks_.size(), 0);
  for (const auto& [track_id, det] : assignment.pairs) {
    const auto it = std::find_if(tracks_.begin(), tracks_.end(), [&](const Track& t) { return t.id == track_id; });
    const auto idx = static_cast<std::size_t>(it - tracks_.begin());
    const auto& box = frame.detections[det];
    try {
      *it = update(*it, observe_box(box, config_.intr, frame.pose.pitch), frame.pose, config_.intr,
                   config_.camera_height, config_.measurement_noise(), config_.gamma);
      it->miss_count = 0;
      it->last_update = frame.t;
      it->last_box = box;
      matched[idx] = 1;
      ++stats_.matched;
    } catch (const SingularInnovation&) {
      ++stats_.failed_updates;
    } catch (const BehindCamera&) {
      ++stats_.failed_updates;
    }
  }
  for (std::size_t i = 0; i < matched.size(); ++i) {
    if (!matched[i]) ++tracks_[i].miss_count;
  }

  for (const int det : assignment.unmatched_detections) spawn(frame.detections[det], frame);

  const auto before = tracks_.size();
  std::erase_if(tracks_, [&](const Track& t) {
    return t.miss_count > config_.miss_max || t.range() > config_.d_max;
  });
  stats_.dropped = static_cast<int>(before - tracks_.size());
  return snapshots();
}

void Tracker::spawn(const BoundingBox2D& box, const Frame& frame) {
  double depth = 0.0;
  try {
    depth = estimate_depth(box, config_.intr, frame.pose.pitch, config_.camera_height, config_.depth);
  } catch (const AboveHorizon&) {
    ++stats_.rejected_detections;
    return;
  }
  const auto user = camera_to_user(backproject(box, depth, config_.intr), frame.pose.yaw);

  Track track;
  track.id = next_id_++;
  track.state.mean << user.x, user.z, 0.0, 0.0;
  track.state.cov = config_.p0_diag.asDiagonal();
  track.cls = box.cls;
  track.obj_height = box.h * depth / config_.intr.fy;
  track.height_samples = 1;
  track.confidence = confidence(track.state.cov, config_.gamma);
  track.last_update = frame.t;
  track.last_box = box;
  tracks_.push_back(track);
  ++stats_.spawned;
}

std::vector<TrackSnapshot> Tracker::snapshots() const {
  std::vector<TrackSnapshot> out;
  out.reserve(tracks_.size());
  for (const auto& t : tracks_) out.push_back(snapshot_of(t));
  return out;
}

}  // namespace blinktrack
