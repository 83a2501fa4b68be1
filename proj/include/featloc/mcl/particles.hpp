#pragma once

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "featloc/geometry/pose.hpp"

namespace featloc {

struct Particle {
  Pose pose;  // world->camera
  double weight = 0.0;
};

struct ParticleSet {
  std::vector<Particle> particles;

  std::size_t size() const { return particles.size(); }
  double total_weight() const;
  /// Rescales the weights to sum to one. Throws DegenerateWeights when the
  /// sum is zero or not finite.
  void normalize();
};

/// 1 / sum(w^2) of the normalised weights.
double effective_sample_size(const ParticleSet& set);

/// Uniform box over camera position (world frame) and heading angles
/// (yaw, pitch, roll) as understood by camera_pose_from_heading.
struct PoseBox {
  Eigen::Vector3d position_min = Eigen::Vector3d::Zero();
  Eigen::Vector3d position_max = Eigen::Vector3d::Zero();
  Eigen::Vector3d angles_min = Eigen::Vector3d::Zero();
  Eigen::Vector3d angles_max = Eigen::Vector3d::Zero();
};

/// Gaussian about a prior pose; covariance over twist coordinates
/// (translation, rotation) in the camera frame of `mean`.
struct GaussianPrior {
  Pose mean;
  Matrix6d covariance = Matrix6d::Zero();
};

/// Independent Gaussians over camera position (world frame) and heading
/// angles (yaw, pitch, roll); zero sigmas pin a coordinate.
struct HeadingGaussian {
  Eigen::Vector3d position_mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d position_sigma = Eigen::Vector3d::Zero();
  Eigen::Vector3d angles_mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d angles_sigma = Eigen::Vector3d::Zero();
};

using InitRegion = std::variant<PoseBox, GaussianPrior, HeadingGaussian>;

/// Zero-mean Gaussian over twist coordinates.
class MotionNoise {
 public:
  MotionNoise() = default;
  /// Throws InvalidArgument unless `covariance` is symmetric PSD.
  explicit MotionNoise(const Matrix6d& covariance);

  static MotionNoise diagonal(const Vector6d& sigmas);

  const Matrix6d& covariance() const { return covariance_; }
  bool is_zero() const { return factor_.isZero(0.0); }

  /// factor * z with z ~ N(0, I).
  template <typename Rng>
  Vector6d sample(Rng& rng) const;

 private:
  Matrix6d covariance_ = Matrix6d::Zero();
  Matrix6d factor_ = Matrix6d::Zero();
};

/// Global (PoseBox) or tracking (GaussianPrior, HeadingGaussian) initialisation with uniform
/// weights. Throws InvalidArgument for n == 0 or an empty box.
ParticleSet init_particles(std::size_t n, const InitRegion& region, std::uint64_t seed);

/// Moves every particle by exp(delta + eta), eta ~ N(0, noise) drawn from the
/// particle's own substream, i.e. pose <- exp(delta + eta)^-1 * pose.
/// Weights are unchanged.
void predict(ParticleSet& set, const Twist& delta, const MotionNoise& noise, std::uint64_t seed);

/// Unconditional systematic resampling to N equal weights.
ParticleSet systematic_resample(const ParticleSet& set, std::uint64_t seed);

/// Systematic resampling when N_eff <= N / 2, otherwise a copy of the input.
/// `resampled` reports which branch was taken.
ParticleSet resample(const ParticleSet& set, std::uint64_t seed, bool* resampled = nullptr);

template <typename Rng>
Vector6d MotionNoise::sample(Rng& rng) const {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector6d z;
  for (int i = 0; i < 6; ++i) z(i) = gauss(rng);
  return factor_ * z;
}

}  // namespace featloc
