#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace featloc {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// Rigid transform x' = R x + t.
///
/// Camera poses follow the world->camera convention throughout the library:
/// a camera with pose P sees world point q at camera-frame coordinates P * q,
/// with x right, y down and z forward.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Pose() = default;
  Pose(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) : rotation(r), translation(t) {}

  static Pose identity() { return {}; }
  static Pose from_quaternion(const Eigen::Quaterniond& q, const Eigen::Vector3d& t);

  Eigen::Quaterniond quaternion() const { return Eigen::Quaterniond(rotation); }

  Eigen::Vector3d operator*(const Eigen::Vector3d& x) const { return rotation * x + translation; }

  /// Composition: (a * b) * x == a * (b * x).
  Pose operator*(const Pose& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }

  Pose inverse() const {
    const Eigen::Matrix3d rt = rotation.transpose();
    return {rt, -rt * translation};
  }

  /// Origin of the source frame expressed in the target frame of the
  /// inverse transform. For a world->camera pose this is the camera centre.
  Eigen::Vector3d center() const { return -rotation.transpose() * translation; }

  /// ||R^T R - I||_inf and det(R) == +1 within `tol`.
  bool is_valid_rotation(double tol = 1e-9) const;
};

/// Six-parameter motion: a translation in metres and an axis-angle rotation.
///
/// The two parts are decoupled: exp_map(xi) is the pose with rotation
/// Exp(xi.rotational) and translation xi.translational. This keeps the
/// translational norm equal to the metric displacement, which is what the
/// constant-velocity scale model reasons about.
struct Twist {
  Eigen::Vector3d translational = Eigen::Vector3d::Zero();
  Eigen::Vector3d rotational = Eigen::Vector3d::Zero();

  Vector6d as_vector() const {
    Vector6d v;
    v << translational, rotational;
    return v;
  }
  static Twist from_vector(const Vector6d& v) { return {v.head<3>(), v.tail<3>()}; }
};

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// Rodrigues' formula with a Taylor expansion below 1e-6 rad.
Eigen::Matrix3d so3_exp(const Eigen::Vector3d& omega);

/// Inverse of so3_exp; returns angles in [0, pi].
Eigen::Vector3d so3_log(const Eigen::Matrix3d& rotation);

/// Geodesic angle between two rotations, in [0, pi].
double rotation_angle(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

Pose exp_map(const Twist& xi);
Twist log_map(const Pose& pose);

/// Projects a nearly orthonormal matrix back onto SO(3).
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m);

/// World->camera pose of a camera at `position` (world frame, z up) whose
/// optical axis points along heading `yaw` (rad, from +x towards +y), tilted
/// down by `pitch` and rolled about the optical axis by `roll`.
Pose camera_pose_from_heading(const Eigen::Vector3d& position, double yaw, double pitch = 0.0,
                              double roll = 0.0);

/// Heading of the optical axis projected onto the world xy plane.
double camera_yaw(const Pose& world_to_camera);

}  // namespace featloc
