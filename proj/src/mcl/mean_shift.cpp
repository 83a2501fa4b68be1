#include "featloc/mcl/mean_shift.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "featloc/common/error.hpp"

namespace featloc {
namespace {

/// Camera centre and camera->world orientation, cached per particle.
struct Sample {
  Eigen::Vector3d center;
  Eigen::Quaterniond orientation;
  double weight;
};

Sample to_sample(const Pose& pose, double w) {
  Eigen::Quaterniond q(pose.rotation.transpose());
  q.normalize();
  return {pose.center(), q, w};
}

Pose from_sample(const Eigen::Vector3d& center, const Eigen::Quaterniond& orientation) {
  const Eigen::Matrix3d r = orientation.normalized().toRotationMatrix().transpose();
  return {r, -r * center};
}

/// Squared chordal rotation distance 4 sin^2(theta / 2) = 4 (1 - <q_a, q_b>^2),
/// theta being the geodesic angle. It agrees with theta^2 to fourth order and
/// is exactly the quantity the quaternion eigenvector mean minimises, which
/// keeps every mean-shift step an ascent step of the kernel density.
double squared_chordal_angle(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  const double dot = a.coeffs().dot(b.coeffs());
  return std::max(0.0, 4.0 * (1.0 - dot * dot));
}

double squared_distance(const Sample& a, const Sample& b, double lambda) {
  return (a.center - b.center).squaredNorm() + lambda * lambda * squared_chordal_angle(a.orientation, b.orientation);
}

std::vector<Sample> samples_of(const ParticleSet& set) {
  std::vector<Sample> out;
  out.reserve(set.size());
  for (const auto& p : set.particles) {
    if (p.weight > 0.0) out.push_back(to_sample(p.pose, p.weight));
  }
  return out;
}

double density(const Sample& at, const std::vector<Sample>& samples, const ClusterConfig& cfg) {
  const double inv = 1.0 / (2.0 * cfg.bandwidth * cfg.bandwidth);
  double sum = 0.0;
  for (const auto& s : samples) {
    sum += s.weight * std::exp(-squared_distance(at, s, cfg.rotation_weight) * inv);
  }
  return sum;
}

/// Returns false when all kernel values vanish.
bool shift(const Sample& at, const std::vector<Sample>& samples, const ClusterConfig& cfg, Sample& out) {
  const double inv = 1.0 / (2.0 * cfg.bandwidth * cfg.bandwidth);
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  double sum = 0.0;
  for (const auto& s : samples) {
    const double k = s.weight * std::exp(-squared_distance(at, s, cfg.rotation_weight) * inv);
    if (k == 0.0) continue;
    c += k * s.center;
    const Eigen::Vector4d q = s.orientation.coeffs();
    m.noalias() += k * q * q.transpose();
    sum += k;
  }
  if (!(sum > 0.0)) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(m);
  const Eigen::Vector4d q = eig.eigenvectors().col(3);
  out.center = c / sum;
  out.orientation = Eigen::Quaterniond(q(3), q(0), q(1), q(2)).normalized();
  out.weight = 0.0;
  return true;
}

void check(const ClusterConfig& cfg) {
  if (!(cfg.bandwidth > 0.0) || cfg.rotation_weight < 0.0 || cfg.max_iters < 1) {
    throw InvalidArgument("invalid clustering parameters");
  }
}

}  // namespace

double pose_distance(const Pose& a, const Pose& b, double rotation_weight) {
  return std::sqrt(squared_distance(to_sample(a, 0.0), to_sample(b, 0.0), rotation_weight));
}

double kernel_density(const Pose& at, const ParticleSet& set, const ClusterConfig& cfg) {
  check(cfg);
  return density(to_sample(at, 0.0), samples_of(set), cfg);
}

Pose shift_once(const Pose& at, const ParticleSet& set, const ClusterConfig& cfg) {
  check(cfg);
  Sample next;
  if (!shift(to_sample(at, 0.0), samples_of(set), cfg, next)) return at;
  return from_sample(next.center, next.orientation);
}

Pose weighted_pose_mean(std::span<const Pose> poses, std::span<const double> weights) {
  if (poses.size() != weights.size()) throw InvalidArgument("pose and weight counts differ");
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  double sum = 0.0;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const Sample s = to_sample(poses[i], weights[i]);
    c += weights[i] * s.center;
    const Eigen::Vector4d q = s.orientation.coeffs();
    m.noalias() += weights[i] * q * q.transpose();
    sum += weights[i];
  }
  if (!(sum > 0.0)) throw DegenerateWeights("pose weights sum to zero");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(m);
  const Eigen::Vector4d q = eig.eigenvectors().col(3);
  return from_sample(c / sum, Eigen::Quaterniond(q(3), q(0), q(1), q(2)));
}

std::vector<Cluster> mean_shift(const ParticleSet& set, const ClusterConfig& cfg) {
  check(cfg);
  const std::vector<Sample> samples = samples_of(set);
  if (samples.empty()) throw DegenerateWeights("no particle has a positive weight");

  const std::size_t seeds = std::min(samples.size(), std::max<std::size_t>(1, cfg.max_seeds));
  const double stride = static_cast<double>(samples.size()) / static_cast<double>(seeds);
  const double merge_sq = 0.25 * cfg.bandwidth * cfg.bandwidth;
  const double tol_sq = cfg.convergence_tol * cfg.convergence_tol;

  std::vector<Sample> modes;
  std::vector<std::size_t> iterations;
  for (std::size_t s = 0; s < seeds; ++s) {
    Sample x = samples[static_cast<std::size_t>(static_cast<double>(s) * stride)];
    std::size_t it = 0;
    while (it < static_cast<std::size_t>(cfg.max_iters)) {
      Sample next;
      if (!shift(x, samples, cfg, next)) break;
      ++it;
      const double moved = squared_distance(x, next, cfg.rotation_weight);
      x = next;
      if (moved < tol_sq) break;
    }
    const bool duplicate = std::any_of(modes.begin(), modes.end(), [&](const Sample& m) {
      return squared_distance(m, x, cfg.rotation_weight) < merge_sq;
    });
    if (!duplicate) {
      modes.push_back(x);
      iterations.push_back(it);
    }
  }

  std::vector<Cluster> clusters;
  clusters.reserve(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) {
    clusters.push_back({from_sample(modes[i].center, modes[i].orientation), density(modes[i], samples, cfg),
                        iterations[i]});
  }
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const Cluster& a, const Cluster& b) { return a.mass > b.mass; });
  return clusters;
}

Pose map_estimate(std::span<const Cluster> clusters) {
  if (clusters.empty()) throw InsufficientData("no clusters");
  std::size_t best = 0;
  for (std::size_t i = 1; i < clusters.size(); ++i) {
    if (clusters[i].mass > clusters[best].mass) best = i;
  }
  return clusters[best].centroid;
}

}  // namespace featloc
