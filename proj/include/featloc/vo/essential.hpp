#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "featloc/geometry/camera.hpp"

namespace featloc {

/// A pixel correspondence between frame t-1 (p1) and frame t (p2).
struct Match2D2D {
  Eigen::Vector2d p1 = Eigen::Vector2d::Zero();
  Eigen::Vector2d p2 = Eigen::Vector2d::Zero();
};

struct VoConfig {
  int ransac_iters = 500;
  /// Symmetric epipolar distance in normalised image coordinates.
  double inlier_threshold = 1e-3;
  int min_inliers = 15;
  /// Stop early once the consensus exceeds this fraction of all matches.
  double early_exit_fraction = 0.8;
  /// Ratio sigma_8 / sigma_1 of the 8-point design matrix below which the
  /// inliers carry no translational information.
  double parallax_ratio = 1e-6;
  double expected_speed = 2.0;  // m/s
  double dt = 0.1;              // s
  std::uint64_t seed = 0;
};

/// Relative motion (R, t) such that a point X2 in camera-2 coordinates sits at
/// X1 = R X2 + t in camera 1. E = [t]x R and x1^T E x2 = 0.
struct RelativeMotion {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t_unit = Eigen::Vector3d::UnitZ();
};

struct EssentialResult {
  /// Scaled so its singular values are (1, 1, 0).
  Eigen::Matrix3d e = Eigen::Matrix3d::Zero();
  std::vector<std::size_t> inliers;
  RelativeMotion motion;
  /// The inliers fit a rotation-only model; `motion.t_unit` is meaningless and
  /// `motion.rotation` comes from bearing alignment instead of E.
  bool zero_parallax = false;
};

Eigen::Matrix3d essential_from_motion(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& t);

/// Symmetric epipolar distance of a normalised correspondence.
double epipolar_residual(const Eigen::Matrix3d& e, const Eigen::Vector3d& x1, const Eigen::Vector3d& x2);

/// Normalised (Hartley-scaled) 8-point solution on normalised coordinates,
/// projected to singular values (1, 1, 0). Needs at least 8 points.
Eigen::Matrix3d eight_point(std::span<const Eigen::Vector3d> x1, std::span<const Eigen::Vector3d> x2);

/// RANSAC over 8-point minimal samples (hypotheses ranked by the MSAC
/// truncated quadratic cost), refit on the consensus, then
/// decomposition and cheirality selection.
/// Throws InsufficientData (< 8 matches) or EstimationFailed (consensus below
/// cfg.min_inliers).
EssentialResult estimate_essential(std::span<const Match2D2D> matches, const CameraIntrinsics& k,
                                   const VoConfig& cfg);

/// The four (R, t) factorisations of E: {R_a, R_b} x {+t, -t}, all proper
/// rotations. Throws InvalidArgument if E is clearly rank 3.
std::array<RelativeMotion, 4> decompose_essential(const Eigen::Matrix3d& e);

/// Per-candidate count of correspondences triangulating in front of both
/// cameras.
std::array<int, 4> cheirality_votes(const std::array<RelativeMotion, 4>& candidates,
                                    std::span<const Eigen::Vector3d> x1, std::span<const Eigen::Vector3d> x2);

/// Candidate with the most positive-depth votes. Throws AmbiguousCheirality
/// when the best count is shared (including the all-zero case).
RelativeMotion select_pose_cheirality(const std::array<RelativeMotion, 4>& candidates,
                                      std::span<const Match2D2D> inliers, const CameraIntrinsics& k);

}  // namespace featloc
