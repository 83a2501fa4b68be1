#pragma once

#include <Eigen/Core>
#include <optional>

#include "featloc/geometry/pose.hpp"

namespace featloc {

/// Pinhole intrinsics. Pixel (i, j) covers [i, i+1) x [j, j+1), so its
/// centre sits at continuous coordinates (i + 0.5, j + 0.5).
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  /// Throws InvalidArgument unless fx, fy > 0 and the principal point lies
  /// inside the image.
  void validate() const;

  Eigen::Matrix3d matrix() const;

  /// Intrinsics for an image resampled by `factor` in both directions.
  CameraIntrinsics scaled(double factor) const;

  bool contains(double u, double v) const { return u >= 0.0 && v >= 0.0 && u < width && v < height; }

  Eigen::Vector3d normalized(const Eigen::Vector2d& pixel) const {
    return {(pixel.x() - cx) / fx, (pixel.y() - cy) / fy, 1.0};
  }
};

/// Projected image location plus camera-frame depth (z).
struct Pixel {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;

  Eigen::Vector2d uv() const { return {u, v}; }
};

/// Pinhole projection without the image-bounds test; none only if the point
/// is not in front of the camera.
std::optional<Pixel> project_unbounded(const Eigen::Vector3d& world_point, const CameraIntrinsics& k,
                                       const Pose& world_to_camera);

/// Pinhole projection. None when depth <= 0 or the pixel falls outside
/// [0, width) x [0, height).
std::optional<Pixel> project(const Eigen::Vector3d& world_point, const CameraIntrinsics& k,
                             const Pose& world_to_camera);

/// World point whose projection is `pixel` at camera-frame depth `depth`.
/// Throws InvalidArgument for non-positive or non-finite depth.
Eigen::Vector3d backproject(const Eigen::Vector2d& pixel, double depth, const CameraIntrinsics& k,
                            const Pose& world_to_camera);

/// Linear (DLT) triangulation in normalised image coordinates. Throws
/// DegenerateGeometry when the rays are (numerically) parallel, i.e. the
/// second-smallest singular value of the 4x4 system falls below 1e-10 of the
/// largest.
Eigen::Vector3d triangulate(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                            const CameraIntrinsics& k, const Pose& pose1, const Pose& pose2);

/// Same, taking normalised (K^-1 applied) homogeneous coordinates.
Eigen::Vector3d triangulate_normalized(const Eigen::Vector3d& x1, const Eigen::Vector3d& x2,
                                       const Pose& pose1, const Pose& pose2);

}  // namespace featloc
