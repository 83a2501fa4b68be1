#include "featloc/geometry/pose.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace featloc {
namespace {

constexpr double kSmallAngle = 1e-6;

Eigen::Vector3d vee(const Eigen::Matrix3d& m) {
  return {m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1)};
}

}  // namespace

Pose Pose::from_quaternion(const Eigen::Quaterniond& q, const Eigen::Vector3d& t) {
  return {q.normalized().toRotationMatrix(), t};
}

bool Pose::is_valid_rotation(double tol) const {
  const Eigen::Matrix3d err = rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
  return err.cwiseAbs().maxCoeff() < tol && std::abs(rotation.determinant() - 1.0) < tol;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  // clang-format off
  s <<     0.0, -v.z(),  v.y(),
         v.z(),    0.0, -v.x(),
        -v.y(),  v.x(),    0.0;
  // clang-format on
  return s;
}

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d w = skew(omega);
  if (theta < kSmallAngle) {
    return Eigen::Matrix3d::Identity() + w + 0.5 * w * w;
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Eigen::Matrix3d::Identity() + a * w + b * w * w;
}

Eigen::Vector3d so3_log(const Eigen::Matrix3d& r) {
  const Eigen::Vector3d v = vee(r);
  const double sin_theta = 0.5 * v.norm();
  const double cos_theta = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double theta = std::atan2(sin_theta, cos_theta);

  if (theta < kSmallAngle) {
    // theta / (2 sin theta) ~ (1 + theta^2 / 6) / 2
    return 0.5 * (1.0 + theta * theta / 6.0) * v;
  }
  if (M_PI - theta > 1e-3) {
    return theta / (2.0 * sin_theta) * v;
  }

  // Near pi the antisymmetric part vanishes; recover the axis from the
  // symmetric part (1 - cos theta) a a^T and take its sign from vee(R).
  const Eigen::Matrix3d b = 0.5 * (r + r.transpose()) - cos_theta * Eigen::Matrix3d::Identity();
  Eigen::Index k = 0;
  b.diagonal().maxCoeff(&k);
  Eigen::Vector3d axis = b.col(k) / std::sqrt(std::max(b(k, k), 1e-300));
  axis.normalize();
  if (axis.dot(v) < 0.0) axis = -axis;
  return theta * axis;
}

double rotation_angle(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  return so3_log(a.transpose() * b).norm();
}

Pose exp_map(const Twist& xi) { return {so3_exp(xi.rotational), xi.translational}; }

Twist log_map(const Pose& pose) { return {pose.translation, so3_log(pose.rotation)}; }

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

Pose camera_pose_from_heading(const Eigen::Vector3d& position, double yaw, double pitch,
                              double roll) {
  // Camera axes expressed in the world frame at zero pitch/roll.
  const Eigen::Vector3d forward(std::cos(yaw), std::sin(yaw), 0.0);
  const Eigen::Vector3d right(std::sin(yaw), -std::cos(yaw), 0.0);
  const Eigen::Vector3d down(0.0, 0.0, -1.0);
  Eigen::Matrix3d camera_to_world;
  camera_to_world.col(0) = right;
  camera_to_world.col(1) = down;
  camera_to_world.col(2) = forward;
  // Pitch tilts the optical axis downwards (rotation about camera x),
  // roll spins about the optical axis.
  camera_to_world = camera_to_world * so3_exp(Eigen::Vector3d(-pitch, 0.0, 0.0)) *
                    so3_exp(Eigen::Vector3d(0.0, 0.0, roll));
  return Pose(camera_to_world, position).inverse();
}

double camera_yaw(const Pose& world_to_camera) {
  const Eigen::Vector3d forward = world_to_camera.rotation.row(2).transpose();
  return std::atan2(forward.y(), forward.x());
}

}  // namespace featloc
