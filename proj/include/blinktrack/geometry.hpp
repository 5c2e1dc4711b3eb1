#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <string_view>

namespace blinktrack {

// Pinhole intrinsics in pixels, plus the image size the detector runs at.
struct CameraIntrinsics {
  double fx = 600.0;
  double fy = 600.0;
  double cx = 320.0;
  double cy = 320.0;
  int width = 640;
  int height = 640;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

// Head orientation reported by the IMU.
//
// Positive pitch raises the horizon row toward the top of the image
// (the camera looks down toward the ground). Yaw rotates the camera
// frame about the vertical axis relative to the user frame.
struct ImuPose {
  double pitch = 0.0;
  double yaw = 0.0;
};

enum class ObjectClass { car, cycle };

std::string_view to_string(ObjectClass cls);
ObjectClass object_class_from_string(std::string_view name);

struct BoundingBox2D {
  double x = 0.0;  // left edge
  double y = 0.0;  // top edge
  double w = 0.0;
  double h = 0.0;
  ObjectClass cls = ObjectClass::car;
  double score = 1.0;

  double bottom() const { return y + h; }
  double center_u() const { return x + 0.5 * w; }
  double area() const { return w * h; }

  friend bool operator==(const BoundingBox2D&, const BoundingBox2D&) = default;
};

// Camera frame: x right in the image, y down, z along the optical axis.
struct PointCamera3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// User frame: body-fixed, z along the camera's optical axis at zero yaw
// (pointing behind the user), x lateral. Tracking lives in the (x, z) plane.
struct PointUser3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Pixel-space observation of one object:
//   u_offset          bottom-center column minus c_x
//   pixel_height      box height
//   horizon_deviation bottom row minus the horizon row
struct ObservationVector {
  double u_offset = 0.0;
  double pixel_height = 0.0;
  double horizon_deviation = 0.0;

  Eigen::Vector3d as_vector() const { return {u_offset, pixel_height, horizon_deviation}; }
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ground-contact point at or above the horizon; no finite depth.
class AboveHorizon : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

// Object has non-positive depth along the camera axis.
class BehindCamera : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

struct DepthLimits {
  double max_depth = 100.0;
  double min_deviation_px = 1.0;
};

// Image row of the horizon for a given head pitch: c_y - f_y tan(pitch).
double horizon_line(const CameraIntrinsics& intr, double pitch);

// Depth of a ground-standing object from the pixel gap between its
// bottom edge and the horizon. Throws AboveHorizon when the gap is at or
// below `limits.min_deviation_px`; clamps to `limits.max_depth`.
double estimate_depth(const BoundingBox2D& box, const CameraIntrinsics& intr, double pitch,
                      double camera_height, const DepthLimits& limits = {});

PointCamera3D backproject_pixel(double u, double v, double depth, const CameraIntrinsics& intr);

// Back-projects the box's bottom-center pixel to the given depth.
PointCamera3D backproject(const BoundingBox2D& box, double depth, const CameraIntrinsics& intr);

PointUser3D camera_to_user(const PointCamera3D& p, double yaw);
PointCamera3D user_to_camera(const PointUser3D& p, double yaw);

// Depth of a user-frame ground point along the camera's optical axis.
double camera_depth(double x_u, double z_u, double yaw);

ObservationVector project_observation(double x_u, double z_u, double obj_height, const ImuPose& pose,
                                      const CameraIntrinsics& intr, double camera_height);

// d(observation)/d(x_u, z_u). Throws BehindCamera under the same condition
// as project_observation.
Eigen::Matrix<double, 3, 2> observation_jacobian(double x_u, double z_u, double obj_height,
                                                 const ImuPose& pose, const CameraIntrinsics& intr,
                                                 double camera_height);

// Observation carried by a detected box, measured against the horizon for
// the given pitch.
ObservationVector observe_box(const BoundingBox2D& box, const CameraIntrinsics& intr, double pitch);

// Inverse of observe_box for a box of the given pixel width.
BoundingBox2D box_from_observation(const ObservationVector& obs, double pixel_width,
                                   const CameraIntrinsics& intr, double pitch,
                                   ObjectClass cls = ObjectClass::car, double score = 1.0);

}  // namespace blinktrack
