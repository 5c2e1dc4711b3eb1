#pragma once

#include "blinktrack/tracker.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace blinktrack {

class DegeneratePosition : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Radial time to collision. `defined == false` means the radial velocity
// vanishes (tangential motion).
struct TimeToCollision {
  double seconds = 0.0;
  bool defined = true;

  static TimeToCollision non_approaching() { return {0.0, false}; }
  bool is_non_approaching() const { return !defined; }
};

// t = -(x^2 + z^2) / (x vx + z vz); positive when closing, negative when
// receding. Throws DegeneratePosition at the origin.
TimeToCollision time_to_collision(double x, double z, double vx, double vz);

// max(0, 1 - t / t_r) for closing objects, 0 for receding and tangential.
double risk_level(const TimeToCollision& ttc, double t_r);

struct RiskConfig {
  double t_r = 3.3;
  double alert_threshold = 0.01;

  void validate() const;
};

struct ObjectRisk {
  int id = 0;
  TimeToCollision ttc;
  double kappa = 0.0;
};

struct RiskAssessment {
  std::vector<ObjectRisk> per_object;
  double overall = 0.0;
  bool alert = false;
  double timestamp = 0.0;
};

// Per-object risk levels and their maximum. An object sitting on the user
// is treated as an imminent collision (kappa = 1).
RiskAssessment assess(std::span<const TrackSnapshot> tracks, const RiskConfig& config, double now);

}  // namespace blinktrack
