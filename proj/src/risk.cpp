#include "blinktrack/risk.hpp"

#include <algorithm>
#include <cmath>

namespace blinktrack {

namespace {
constexpr double kRadialEpsilon = 1e-9;
}

TimeToCollision time_to_collision(double x, double z, double vx, double vz) {
  const double range_sq = x * x + z * z;
  if (range_sq == 0.0) throw DegeneratePosition("time_to_collision: object at the origin");
  const double radial = x * vx + z * vz;
  if (std::abs(radial) < kRadialEpsilon) return TimeToCollision::non_approaching();
  return {-range_sq / radial, true};
}

double risk_level(const TimeToCollision& ttc, double t_r) {
  if (!(t_r > 0.0)) throw std::invalid_argument("risk_level: t_r must be > 0");
  if (ttc.is_non_approaching() || ttc.seconds < 0.0) return 0.0;
  return std::clamp(1.0 - ttc.seconds / t_r, 0.0, 1.0);
}

void RiskConfig::validate() const {
  if (!(t_r > 0.0)) throw std::invalid_argument("risk.t_r: must be > 0");
  if (!(alert_threshold >= 0.0 && alert_threshold <= 1.0)) {
    throw std::invalid_argument("risk.alert_threshold: must be in [0,1]");
  }
}

RiskAssessment assess(std::span<const TrackSnapshot> tracks, const RiskConfig& config, double now) {
  RiskAssessment out;
  out.timestamp = now;
  out.per_object.reserve(tracks.size());
  for (const auto& t : tracks) {
    ObjectRisk risk{t.id, {}, 1.0};
    try {
      risk.ttc = time_to_collision(t.x, t.z, t.vx, t.vz);
      risk.kappa = risk_level(risk.ttc, config.t_r);
    } catch (const DegeneratePosition&) {
      risk.ttc = {0.0, true};
    }
    out.overall = std::max(out.overall, risk.kappa);
    out.per_object.push_back(risk);
  }
  out.alert = !out.per_object.empty() && out.overall >= config.alert_threshold;
  return out;
}

}  // namespace blinktrack
