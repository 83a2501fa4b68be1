#include "featloc/geometry/camera.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "featloc/common/error.hpp"

namespace featloc {

namespace {
constexpr double kDegenerateRatio = 1e-10;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidArgument("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw InvalidArgument("image size must be positive");
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw InvalidArgument("principal point outside the image");
  }
}

Eigen::Matrix3d CameraIntrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

CameraIntrinsics CameraIntrinsics::scaled(double factor) const {
  CameraIntrinsics k = *this;
  k.fx *= factor;
  k.fy *= factor;
  k.cx *= factor;
  k.cy *= factor;
  k.width = static_cast<int>(std::lround(width * factor));
  k.height = static_cast<int>(std::lround(height * factor));
  return k;
}

std::optional<Pixel> project_unbounded(const Eigen::Vector3d& world_point, const CameraIntrinsics& k,
                                       const Pose& world_to_camera) {
  const Eigen::Vector3d c = world_to_camera * world_point;
  if (!(c.z() > 0.0)) return std::nullopt;
  return Pixel{k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy, c.z()};
}

std::optional<Pixel> project(const Eigen::Vector3d& world_point, const CameraIntrinsics& k,
                             const Pose& world_to_camera) {
  auto p = project_unbounded(world_point, k, world_to_camera);
  if (!p || !k.contains(p->u, p->v)) return std::nullopt;
  return p;
}

Eigen::Vector3d backproject(const Eigen::Vector2d& pixel, double depth, const CameraIntrinsics& k,
                            const Pose& world_to_camera) {
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    throw InvalidArgument("backprojection depth must be positive and finite");
  }
  const Eigen::Vector3d c = k.normalized(pixel) * depth;
  return world_to_camera.rotation.transpose() * (c - world_to_camera.translation);
}

Eigen::Vector3d triangulate_normalized(const Eigen::Vector3d& x1, const Eigen::Vector3d& x2,
                                       const Pose& pose1, const Pose& pose2) {
  const double baseline = (pose1.center() - pose2.center()).norm();
  const double scale = 1.0 + pose1.center().norm() + pose2.center().norm();
  if (baseline <= 1e-12 * scale) throw DegenerateGeometry("zero triangulation baseline");

  Eigen::Matrix<double, 3, 4> m1, m2;
  m1 << pose1.rotation, pose1.translation;
  m2 << pose2.rotation, pose2.translation;
  const Eigen::Vector2d a = x1.hnormalized();
  const Eigen::Vector2d b = x2.hnormalized();

  Eigen::Matrix4d system;
  system.row(0) = a.x() * m1.row(2) - m1.row(0);
  system.row(1) = a.y() * m1.row(2) - m1.row(1);
  system.row(2) = b.x() * m2.row(2) - m2.row(0);
  system.row(3) = b.y() * m2.row(2) - m2.row(1);

  Eigen::JacobiSVD<Eigen::Matrix4d> svd(system, Eigen::ComputeFullV);
  const Eigen::Vector4d s = svd.singularValues();
  if (!(s(0) > 0.0) || s(2) / s(0) < kDegenerateRatio) {
    throw DegenerateGeometry("triangulation rays are parallel");
  }
  const Eigen::Vector4d h = svd.matrixV().col(3);
  if (std::abs(h(3)) < 1e-300) throw DegenerateGeometry("triangulated point at infinity");
  return h.head<3>() / h(3);
}

Eigen::Vector3d triangulate(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                            const CameraIntrinsics& k, const Pose& pose1, const Pose& pose2) {
  return triangulate_normalized(k.normalized(p1), k.normalized(p2), pose1, pose2);
}

}  // namespace featloc
