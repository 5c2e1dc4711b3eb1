#include "blinktrack/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace blinktrack {

namespace {

void require_pitch(double pitch) {
  if (!(std::abs(pitch) < 0.5 * std::numbers::pi)) {
    throw std::invalid_argument("pitch must lie in (-pi/2, pi/2)");
  }
}

}  // namespace

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0)) throw std::invalid_argument("intrinsics.fx: must be > 0");
  if (!(fy > 0.0)) throw std::invalid_argument("intrinsics.fy: must be > 0");
  if (width <= 0) throw std::invalid_argument("intrinsics.width: must be > 0");
  if (height <= 0) throw std::invalid_argument("intrinsics.height: must be > 0");
  if (!(cx >= 0.0 && cx <= width)) throw std::invalid_argument("intrinsics.cx: outside image");
  if (!(cy >= 0.0 && cy <= height)) throw std::invalid_argument("intrinsics.cy: outside image");
}

std::string_view to_string(ObjectClass cls) {
  switch (cls) {
    case ObjectClass::car:
      return "car";
    case ObjectClass::cycle:
      return "cycle";
  }
  return "car";
}

ObjectClass object_class_from_string(std::string_view name) {
  if (name == "car") return ObjectClass::car;
  if (name == "cycle") return ObjectClass::cycle;
  throw std::invalid_argument("unknown object class '" + std::string(name) + "'");
}

double horizon_line(const CameraIntrinsics& intr, double pitch) {
  require_pitch(pitch);
  return intr.cy - intr.fy * std::tan(pitch);
}

double estimate_depth(const BoundingBox2D& box, const CameraIntrinsics& intr, double pitch,
                      double camera_height, const DepthLimits& limits) {
  if (!(camera_height > 0.0)) throw std::invalid_argument("camera_height must be > 0");
  const double deviation = box.bottom() - horizon_line(intr, pitch);
  if (deviation <= limits.min_deviation_px) {
    throw AboveHorizon("ground contact at or above the horizon");
  }
  return std::min(intr.fy * camera_height / deviation, limits.max_depth);
}

PointCamera3D backproject_pixel(double u, double v, double depth, const CameraIntrinsics& intr) {
  if (!(depth > 0.0)) throw std::invalid_argument("depth must be > 0");
  return {(u - intr.cx) * depth / intr.fx, (v - intr.cy) * depth / intr.fy, depth};
}

PointCamera3D backproject(const BoundingBox2D& box, double depth, const CameraIntrinsics& intr) {
  return backproject_pixel(box.center_u(), box.bottom(), depth, intr);
}

PointUser3D camera_to_user(const PointCamera3D& p, double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {c * p.x - s * p.z, p.y, s * p.x + c * p.z};
}

PointCamera3D user_to_camera(const PointUser3D& p, double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {c * p.x + s * p.z, p.y, -s * p.x + c * p.z};
}

double camera_depth(double x_u, double z_u, double yaw) {
  return -x_u * std::sin(yaw) + z_u * std::cos(yaw);
}

ObservationVector project_observation(double x_u, double z_u, double obj_height, const ImuPose& pose,
                                      const CameraIntrinsics& intr, double camera_height) {
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);
  const double depth = -x_u * s + z_u * c;
  if (!(depth > 0.0)) throw BehindCamera("object behind the camera plane");
  const double lateral = x_u * c + z_u * s;
  return {intr.fx * lateral / depth * std::cos(pose.pitch), intr.fy * obj_height / depth,
          intr.fy * camera_height / depth};
}

Eigen::Matrix<double, 3, 2> observation_jacobian(double x_u, double z_u, double obj_height,
                                                 const ImuPose& pose, const CameraIntrinsics& intr,
                                                 double camera_height) {
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);
  const double depth = -x_u * s + z_u * c;
  if (!(depth > 0.0)) throw BehindCamera("object behind the camera plane");
  const double inv_d2 = 1.0 / (depth * depth);
  const double kx = intr.fx * std::cos(pose.pitch) * inv_d2;

  // d(depth)/dx = -s, d(depth)/dz = c; the lateral term simplifies to z and -x.
  Eigen::Matrix<double, 3, 2> jac;
  jac(0, 0) = kx * z_u;
  jac(0, 1) = -kx * x_u;
  jac(1, 0) = intr.fy * obj_height * s * inv_d2;
  jac(1, 1) = -intr.fy * obj_height * c * inv_d2;
  jac(2, 0) = intr.fy * camera_height * s * inv_d2;
  jac(2, 1) = -intr.fy * camera_height * c * inv_d2;
  return jac;
}

ObservationVector observe_box(const BoundingBox2D& box, const CameraIntrinsics& intr, double pitch) {
  return {box.center_u() - intr.cx, box.h, box.bottom() - horizon_line(intr, pitch)};
}

BoundingBox2D box_from_observation(const ObservationVector& obs, double pixel_width,
                                   const CameraIntrinsics& intr, double pitch, ObjectClass cls,
                                   double score) {
  const double bottom = horizon_line(intr, pitch) + obs.horizon_deviation;
  const double u = intr.cx + obs.u_offset;
  return {u - 0.5 * pixel_width, bottom - obs.pixel_height, pixel_width, obs.pixel_height, cls, score};
}

}  // namespace blinktrack
