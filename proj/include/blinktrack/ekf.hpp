#pragma once

#include "blinktrack/geometry.hpp"

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <concepts>
#include <stdexcept>

namespace blinktrack {

// [x, z, vx, vz] in the user frame.
using StateVector = Eigen::Vector4d;
using StateCovariance = Eigen::Matrix4d;

struct TrackState {
  StateVector mean = StateVector::Zero();
  StateCovariance cov = StateCovariance::Identity();
};

class SingularInnovation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Eigen::Matrix4d transition_matrix(double dt);

// White-noise-acceleration discretization for spectral density q.
Eigen::Matrix4d process_noise(double dt, double q);

TrackState predict_state(const TrackState& state, double dt, double q);

// 1 / (trace(P) + gamma)
double confidence(const StateCovariance& cov, double gamma);

template <typename Model>
concept MeasurementModel = requires(const Model& model, const StateVector& x) {
  { Model::kDim } -> std::convertible_to<int>;
  { model.predict(x) } -> std::convertible_to<Eigen::Matrix<double, Model::kDim, 1>>;
  { model.jacobian(x) } -> std::convertible_to<Eigen::Matrix<double, Model::kDim, 4>>;
};

// One EKF correction with a Joseph-form covariance update. Throws
// SingularInnovation when the innovation covariance has a condition number
// above `max_condition` (or is not positive definite).
template <MeasurementModel Model>
TrackState ekf_update(const TrackState& prior, const Eigen::Matrix<double, Model::kDim, 1>& measurement,
                      const Model& model,
                      const Eigen::Matrix<double, Model::kDim, Model::kDim>& noise,
                      double max_condition = 1e12) {
  constexpr int M = Model::kDim;
  using MeasVec = Eigen::Matrix<double, M, 1>;
  using MeasMat = Eigen::Matrix<double, M, M>;
  using Jac = Eigen::Matrix<double, M, 4>;

  const Jac H = model.jacobian(prior.mean);
  const MeasVec innovation = measurement - model.predict(prior.mean);
  MeasMat S = H * prior.cov * H.transpose() + noise;
  S = 0.5 * (S + S.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<MeasMat> eig(S, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > max_condition) {
    throw SingularInnovation("innovation covariance is numerically singular");
  }

  const Eigen::Matrix<double, 4, M> gain = prior.cov * H.transpose() * S.inverse();
  const Eigen::Matrix4d I_KH = Eigen::Matrix4d::Identity() - gain * H;

  TrackState post;
  post.mean = prior.mean + gain * innovation;
  post.cov = I_KH * prior.cov * I_KH.transpose() + gain * noise * gain.transpose();
  post.cov = 0.5 * (post.cov + post.cov.transpose()).eval();
  return post;
}

// Pixel observation (u offset, box height, horizon deviation) of a planar
// track; only the position columns of the Jacobian are non-zero.
struct PixelObservationModel {
  static constexpr int kDim = 3;

  ImuPose pose;
  CameraIntrinsics intr;
  double camera_height = 1.55;
  double obj_height = 1.5;

  Eigen::Vector3d predict(const StateVector& x) const;
  Eigen::Matrix<double, 3, 4> jacobian(const StateVector& x) const;
};

// Direct observation of (x, z).
struct PositionObservationModel {
  static constexpr int kDim = 2;

  Eigen::Vector2d predict(const StateVector& x) const { return x.head<2>(); }
  Eigen::Matrix<double, 2, 4> jacobian(const StateVector&) const {
    Eigen::Matrix<double, 2, 4> H = Eigen::Matrix<double, 2, 4>::Zero();
    H(0, 0) = 1.0;
    H(1, 1) = 1.0;
    return H;
  }
};

}  // namespace blinktrack
