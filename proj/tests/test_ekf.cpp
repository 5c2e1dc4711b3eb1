#include "blinktrack/ekf.hpp"
#include "blinktrack/tracker.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace blinktrack;

namespace {

TrackState make_state(double x, double z, double vx, double vz, double p = 1.0) {
  TrackState s;
  s.mean << x, z, vx, vz;
  s.cov = StateCovariance::Identity() * p;
  return s;
}

double asymmetry(const StateCovariance& P) { return (P - P.transpose()).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Predict, Examples) {
  const auto a = predict_state(make_state(0, -10, 0, 2), 0.1, 2.0);
  EXPECT_NEAR(a.mean(0), 0.0, 1e-12);
  EXPECT_NEAR(a.mean(1), -9.8, 1e-12);
  EXPECT_DOUBLE_EQ(a.mean(2), 0.0);
  EXPECT_DOUBLE_EQ(a.mean(3), 2.0);

  const auto s = make_state(3, 4, 5, 6, 2.5);
  const auto b = predict_state(s, 0.0, 2.0);
  EXPECT_EQ(b.mean, s.mean);
  EXPECT_EQ(b.cov, s.cov);

  const auto c = predict_state(make_state(1, 5, -1, -1), 2.0, 1.0);
  EXPECT_NEAR(c.mean(0), -1.0, 1e-12);
  EXPECT_NEAR(c.mean(1), 3.0, 1e-12);
  EXPECT_THROW(predict_state(s, -0.1, 1.0), std::invalid_argument);
}

TEST(Predict, TraceNonDecreasing) {
  auto s = make_state(0, 10, 0, -3, 0.5);
  for (int i = 0; i < 100; ++i) {
    const auto n = predict_state(s, 0.1, 2.0);
    EXPECT_GE(n.cov.trace(), s.cov.trace());
    s = n;
  }
}

TEST(ProcessNoise, WhiteNoiseAcceleration) {
  const auto Q = process_noise(0.5, 2.0);
  EXPECT_NEAR(Q(0, 0), 2.0 * 0.125 / 3.0, 1e-15);
  EXPECT_NEAR(Q(0, 2), 2.0 * 0.25 / 2.0, 1e-15);
  EXPECT_NEAR(Q(2, 2), 2.0 * 0.5, 1e-15);
  EXPECT_EQ(Q(0, 1), 0.0);
  EXPECT_EQ(process_noise(0.0, 2.0), Eigen::Matrix4d::Zero());
}

TEST(Confidence, Examples) {
  StateCovariance P = StateCovariance::Zero();
  P.diagonal() << 1.0, 1.0, 1.0, 1.0;
  EXPECT_NEAR(confidence(P, 1e-6), 0.25, 1e-6);
  EXPECT_NEAR(confidence(StateCovariance::Zero(), 1e-6), 1e6, 1e-3);
  P.diagonal() << 0.25, 0.25, 0.25, 0.25;
  EXPECT_NEAR(confidence(P, 1e-6), 0.999999, 1e-9);
  EXPECT_THROW(confidence(P, 0.0), std::invalid_argument);
}

TEST(Update, ZeroInnovationLeavesMeanUnchanged) {
  PixelObservationModel model{{0.05, 0.1}, {}, 1.55, 1.5};
  const auto prior = make_state(1.0, 15.0, 0.0, -5.0, 4.0);
  const Eigen::Vector3d y = model.predict(prior.mean);
  const auto post = ekf_update(prior, y, model, Eigen::Matrix3d(Eigen::Vector3d(16, 9, 9).asDiagonal()));
  EXPECT_LT((post.mean - prior.mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(post.cov.trace(), prior.cov.trace() + 1e-9);
}

// Object behind a user whose camera faces the -z half-plane (yaw = pi).
TEST(Update, ConvergesTowardTrueRange) {
  PixelObservationModel model{{0.0, std::numbers::pi}, {}, 1.55, 1.5};
  TrackState prior = make_state(0.0, -10.0, 0.0, 2.0);
  prior.cov.diagonal() << 4.0, 4.0, 16.0, 16.0;
  const Eigen::Vector3d y = model.predict(Eigen::Vector4d(0.0, -12.0, 0.0, 3.0));
  const Eigen::Matrix3d R = Eigen::Matrix3d::Identity() * 0.01;
  const auto post = ekf_update(prior, y, model, R);
  EXPECT_NEAR(post.mean(1), -12.0, 0.5);
  EXPECT_LE(post.cov.trace(), prior.cov.trace() + 1e-9);
}

TEST(Update, SingularInnovationThrows) {
  PositionObservationModel model;
  TrackState prior = make_state(0, 10, 0, 0, 0.0);
  prior.cov.diagonal() << 1e14, 1e-6, 1.0, 1.0;
  EXPECT_THROW(ekf_update(prior, Eigen::Vector2d(0, 10), model, Eigen::Matrix2d::Identity() * 1e-3),
               SingularInnovation);
  prior.cov.setZero();
  EXPECT_THROW(ekf_update(prior, Eigen::Vector2d(0, 10), model, Eigen::Matrix2d::Zero()), SingularInnovation);
}

TEST(Update, PixelJacobianMatchesFiniteDifferences) {
  PixelObservationModel model{{0.1, -0.2}, {}, 1.55, 1.6};
  const Eigen::Vector4d x(2.0, 12.0, 1.0, -4.0);
  const auto H = model.jacobian(x);
  for (int c = 0; c < 4; ++c) {
    Eigen::Vector4d dx = Eigen::Vector4d::Zero();
    dx(c) = 1e-6;
    const Eigen::Vector3d fd = (model.predict(x + dx) - model.predict(x - dx)) / 2e-6;
    for (int r = 0; r < 3; ++r) EXPECT_NEAR(H(r, c), fd(r), 1e-5 * std::max(1.0, std::abs(fd(r))));
  }
}

TEST(Update, LinearModelMatchesClosedFormKalman) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  TrackState s = make_state(1.0, 20.0, 0.0, -5.0, 3.0);
  Eigen::Vector4d x = s.mean;
  Eigen::Matrix4d P = s.cov;
  const Eigen::Matrix2d R = Eigen::Vector2d(0.5, 0.8).asDiagonal();
  for (int i = 0; i < 200; ++i) {
    s = predict_state(s, 0.1, 1.5);
    x = transition_matrix(0.1) * x;
    P = transition_matrix(0.1) * P * transition_matrix(0.1).transpose() + process_noise(0.1, 1.5);
    const Eigen::Vector2d y(x(0) + g(rng), x(1) + g(rng));
    s = ekf_update(s, y, PositionObservationModel{}, R);
    oracle::linear_kalman_update(x, P, y, R);
    ASSERT_LT((s.mean - x).cwiseAbs().maxCoeff(), 1e-9);
    ASSERT_LT((s.cov - P).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Covariance, SymmetricOverLongSequences) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 3.0);
  PixelObservationModel model{{0.0, 0.0}, {}, 1.55, 1.5};
  TrackState s = make_state(1.0, 25.0, 0.0, -6.0, 4.0);
  const Eigen::Matrix3d R = Eigen::Vector3d(16, 9, 9).asDiagonal();
  for (int i = 0; i < 1000; ++i) {
    s = predict_state(s, 0.1 * (1 + static_cast<int>(unit(rng) * 5)), 2.0);
    model.pose = {0.1 * (unit(rng) - 0.5), 0.4 * (unit(rng) - 0.5)};
    if (camera_depth(s.mean(0), s.mean(1), model.pose.yaw) < 3.0 || std::abs(s.mean(0)) > 15.0) {
      s.mean(0) = 1.0;  // keep in front of the camera
      s.mean(1) = 25.0;
    }
    if (unit(rng) < 0.5) {
      Eigen::Vector3d y = model.predict(s.mean);
      for (int k = 0; k < 3; ++k) y(k) += g(rng);
      s = ekf_update(s, y, model, R);
    }
    ASSERT_LE(asymmetry(s.cov), 1e-9);
    ASSERT_GE(s.cov.diagonal().minCoeff(), 0.0);
  }
}
