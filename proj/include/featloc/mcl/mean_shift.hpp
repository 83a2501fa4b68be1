#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "featloc/mcl/particles.hpp"

namespace featloc {

/// Weighted mean-shift over camera poses with a Gaussian kernel on
///   d^2 = |c_a - c_b|^2 + rotation_weight^2 * (2 sin(theta / 2))^2,
/// c being camera centres (metres) and theta the rotation angle between the
/// poses (radians). The chordal term 2 sin(theta / 2) matches theta for
/// small angles and is what the quaternion orientation mean minimises.
struct ClusterConfig {
  double bandwidth = 0.5;
  double rotation_weight = 1.0;
  int max_iters = 50;
  double convergence_tol = 1e-5;
  /// Upper bound on mean-shift starting points; seeds are taken at a
  /// regular stride through the particle list.
  std::size_t max_seeds = 100;
};

struct Cluster {
  Pose centroid;
  /// Sum over particles of kernel(centroid, particle) * weight.
  double mass = 0.0;
  std::size_t iterations = 0;
};

double pose_distance(const Pose& a, const Pose& b, double rotation_weight);

/// Weighted kernel density sum_i w_i exp(-d_i^2 / (2 h^2)) at `at`.
double kernel_density(const Pose& at, const ParticleSet& set, const ClusterConfig& cfg);

/// One mean-shift update from `at`. Returns `at` unchanged when every kernel
/// value underflows.
Pose shift_once(const Pose& at, const ParticleSet& set, const ClusterConfig& cfg);

/// Weighted mean of camera centres and chordal (quaternion) mean of the
/// orientations. Throws DegenerateWeights when the weights sum to zero.
Pose weighted_pose_mean(std::span<const Pose> poses, std::span<const double> weights);

/// Modes sorted by decreasing mass; modes closer than bandwidth / 2 merge.
std::vector<Cluster> mean_shift(const ParticleSet& set, const ClusterConfig& cfg);

/// Centroid of the heaviest cluster; on equal mass the earliest one wins.
/// Throws InsufficientData for an empty list.
Pose map_estimate(std::span<const Cluster> clusters);

}  // namespace featloc
