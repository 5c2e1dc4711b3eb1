#include "blinktrack/ekf.hpp"

namespace blinktrack {

Eigen::Matrix4d transition_matrix(double dt) {
  Eigen::Matrix4d F = Eigen::Matrix4d::Identity();
  F(0, 2) = dt;
  F(1, 3) = dt;
  return F;
}

Eigen::Matrix4d process_noise(double dt, double q) {
  const double dt2 = dt * dt;
  const double pp = q * dt2 * dt / 3.0;
  const double pv = q * dt2 / 2.0;
  const double vv = q * dt;
  Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
  Q(0, 0) = pp;
  Q(1, 1) = pp;
  Q(0, 2) = Q(2, 0) = pv;
  Q(1, 3) = Q(3, 1) = pv;
  Q(2, 2) = vv;
  Q(3, 3) = vv;
  return Q;
}

TrackState predict_state(const TrackState& state, double dt, double q) {
  if (dt < 0.0) throw std::invalid_argument("predict: dt must be >= 0");
  if (dt == 0.0) return state;
  const Eigen::Matrix4d F = transition_matrix(dt);
  TrackState out;
  out.mean = F * state.mean;
  out.cov = F * state.cov * F.transpose() + process_noise(dt, q);
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

double confidence(const StateCovariance& cov, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("confidence: gamma must be > 0");
  return 1.0 / (cov.trace() + gamma);
}

Eigen::Vector3d PixelObservationModel::predict(const StateVector& x) const {
  return project_observation(x(0), x(1), obj_height, pose, intr, camera_height).as_vector();
}

Eigen::Matrix<double, 3, 4> PixelObservationModel::jacobian(const StateVector& x) const {
  Eigen::Matrix<double, 3, 4> H = Eigen::Matrix<double, 3, 4>::Zero();
  H.leftCols<2>() = observation_jacobian(x(0), x(1), obj_height, pose, intr, camera_height);
  return H;
}

}  // namespace blinktrack
