#include "featloc/mcl/particles.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "featloc/common/error.hpp"
#include "featloc/common/random.hpp"

namespace featloc {

double ParticleSet::total_weight() const {
  double sum = 0.0;
  for (const auto& p : particles) sum += p.weight;
  return sum;
}

void ParticleSet::normalize() {
  const double sum = total_weight();
  if (!(sum > 0.0) || !std::isfinite(sum)) throw DegenerateWeights("particle weights sum to zero");
  for (auto& p : particles) p.weight /= sum;
}

double effective_sample_size(const ParticleSet& set) {
  const double sum = set.total_weight();
  if (!(sum > 0.0)) return 0.0;
  double sq = 0.0;
  for (const auto& p : set.particles) {
    const double w = p.weight / sum;
    sq += w * w;
  }
  return 1.0 / sq;
}

MotionNoise::MotionNoise(const Matrix6d& covariance) : covariance_(covariance) {
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if (!covariance.allFinite() || (covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument("motion covariance must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix6d> eig(covariance);
  const Vector6d values = eig.eigenvalues();
  if (values.minCoeff() < -1e-12 * scale) throw InvalidArgument("motion covariance is not positive semidefinite");
  factor_ = eig.eigenvectors() * values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  if (covariance.isZero(0.0)) factor_.setZero();
}

MotionNoise MotionNoise::diagonal(const Vector6d& sigmas) {
  return MotionNoise(Matrix6d(sigmas.cwiseAbs2().asDiagonal()));
}

ParticleSet init_particles(std::size_t n, const InitRegion& region, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("need at least one particle");
  ParticleSet set;
  set.particles.resize(n);
  const double w = 1.0 / static_cast<double>(n);

  if (const auto* box = std::get_if<PoseBox>(&region)) {
    if ((box->position_max - box->position_min).minCoeff() < 0.0 ||
        (box->angles_max - box->angles_min).minCoeff() < 0.0) {
      throw InvalidArgument("empty initialisation region");
    }
    for (std::size_t i = 0; i < n; ++i) {
      StreamRng rng(seed, 0x696e6974ULL, i);
      Eigen::Vector3d pos, ang;
      for (int a = 0; a < 3; ++a) {
        pos(a) = box->position_min(a) + (box->position_max(a) - box->position_min(a)) * rng.uniform();
      }
      for (int a = 0; a < 3; ++a) {
        ang(a) = box->angles_min(a) + (box->angles_max(a) - box->angles_min(a)) * rng.uniform();
      }
      set.particles[i] = {camera_pose_from_heading(pos, ang(0), ang(1), ang(2)), w};
    }
  } else if (const auto* hg = std::get_if<HeadingGaussian>(&region)) {
    if (hg->position_sigma.minCoeff() < 0.0 || hg->angles_sigma.minCoeff() < 0.0) {
      throw InvalidArgument("negative prior sigma");
    }
    for (std::size_t i = 0; i < n; ++i) {
      StreamRng rng(seed, 0x696e6974ULL, i);
      std::normal_distribution<double> gauss(0.0, 1.0);
      Eigen::Vector3d pos, ang;
      for (int a = 0; a < 3; ++a) pos(a) = hg->position_mean(a) + hg->position_sigma(a) * gauss(rng);
      for (int a = 0; a < 3; ++a) ang(a) = hg->angles_mean(a) + hg->angles_sigma(a) * gauss(rng);
      set.particles[i] = {camera_pose_from_heading(pos, ang(0), ang(1), ang(2)), w};
    }
  } else {
    const auto& prior = std::get<GaussianPrior>(region);
    const MotionNoise spread(prior.covariance);
    for (std::size_t i = 0; i < n; ++i) {
      StreamRng rng(seed, 0x696e6974ULL, i);
      const Twist eta = Twist::from_vector(spread.sample(rng));
      set.particles[i] = {exp_map(eta).inverse() * prior.mean, w};
    }
  }
  return set;
}

void predict(ParticleSet& set, const Twist& delta, const MotionNoise& noise, std::uint64_t seed) {
  const Vector6d base = delta.as_vector();
  const bool noiseless = noise.is_zero();
  for (std::size_t i = 0; i < set.size(); ++i) {
    Vector6d xi = base;
    if (!noiseless) {
      StreamRng rng(seed, 0x70726564ULL, i);
      xi += noise.sample(rng);
    }
    auto& pose = set.particles[i].pose;
    pose = exp_map(Twist::from_vector(xi)).inverse() * pose;
  }
}

ParticleSet systematic_resample(const ParticleSet& set, std::uint64_t seed) {
  const std::size_t n = set.size();
  const double sum = set.total_weight();
  if (n == 0 || !(sum > 0.0) || !std::isfinite(sum)) throw DegenerateWeights("cannot resample zero weights");

  StreamRng rng(seed, 0x72736d70ULL);
  const double step = 1.0 / static_cast<double>(n);
  const double start = rng.uniform() * step;
  ParticleSet out;
  out.particles.reserve(n);
  std::size_t i = 0;
  double cumulative = set.particles[0].weight / sum;
  for (std::size_t m = 0; m < n; ++m) {
    const double u = start + static_cast<double>(m) * step;
    while (u >= cumulative && i + 1 < n) {
      ++i;
      cumulative += set.particles[i].weight / sum;
    }
    out.particles.push_back({set.particles[i].pose, step});
  }
  return out;
}

ParticleSet resample(const ParticleSet& set, std::uint64_t seed, bool* resampled) {
  const double sum = set.total_weight();
  if (set.size() == 0 || !(sum > 0.0) || !std::isfinite(sum)) {
    throw DegenerateWeights("cannot resample zero weights");
  }
  const bool trigger = effective_sample_size(set) <= 0.5 * static_cast<double>(set.size());
  if (resampled != nullptr) *resampled = trigger;
  return trigger ? systematic_resample(set, seed) : set;
}

}  // namespace featloc
