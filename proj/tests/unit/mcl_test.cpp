#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "featloc/common/error.hpp"
#include "featloc/common/random.hpp"
#include "featloc/harness/experiment.hpp"
#include "featloc/harness/trajectory.hpp"
#include "featloc/harness/world.hpp"
#include "featloc/mcl/filter.hpp"
#include "featloc/mcl/likelihood.hpp"
#include "featloc/mcl/mean_shift.hpp"
#include "featloc/mcl/particles.hpp"

namespace featloc {
namespace {

bool same_pose(const Pose& a, const Pose& b, double tol) {
  return (a.rotation - b.rotation).cwiseAbs().maxCoeff() <= tol &&
         (a.translation - b.translation).cwiseAbs().maxCoeff() <= tol;
}

ParticleSet weighted_set(std::initializer_list<double> weights) {
  ParticleSet set;
  double x = 0.0;
  for (double w : weights) {
    set.particles.push_back({Pose(Eigen::Matrix3d::Identity(), Eigen::Vector3d(x, 0, 0)), w});
    x += 1.0;
  }
  return set;
}

PoseBox point_region(const Eigen::Vector3d& p, double yaw) {
  return {p, p, {yaw, 0, 0}, {yaw, 0, 0}};
}

// ---------------------------------------------------------------- init

TEST(Init, PointRegionSingleParticle) {
  const ParticleSet set = init_particles(1, point_region({1, 2, 0.5}, 0.3), 4);
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set.particles[0].weight, 1.0);
  EXPECT_TRUE(same_pose(set.particles[0].pose, camera_pose_from_heading({1, 2, 0.5}, 0.3), 1e-15));
}

TEST(Init, UniformBoxMean) {
  const std::size_t n = 10000;
  PoseBox box{{-1, 2, 0.5}, {3, 4, 1.5}, {-1, 0, 0}, {1, 0, 0}};
  const ParticleSet set = init_particles(n, box, 9);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : set.particles) {
    mean += p.pose.center();
    EXPECT_DOUBLE_EQ(p.weight, 1.0 / n);
  }
  mean /= n;
  const Eigen::Vector3d centre = 0.5 * (box.position_min + box.position_max);
  for (int a = 0; a < 3; ++a) {
    const double sigma = (box.position_max(a) - box.position_min(a)) / std::sqrt(12.0);
    EXPECT_LT(std::abs(mean(a) - centre(a)), 3.0 * sigma / std::sqrt(n)) << a;
  }
}

TEST(Init, DeterministicPerSeed) {
  PoseBox box{{0, 0, 0}, {1, 1, 1}, {-1, -0.1, 0}, {1, 0.1, 0}};
  const ParticleSet a = init_particles(100, box, 5), b = init_particles(100, box, 5), c = init_particles(100, box, 6);
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_EQ(a.particles[i].pose.rotation, b.particles[i].pose.rotation);
    EXPECT_EQ(a.particles[i].pose.translation, b.particles[i].pose.translation);
  }
  EXPECT_NE(a.particles[0].pose.translation, c.particles[0].pose.translation);
}

TEST(Init, Errors) {
  EXPECT_THROW(init_particles(0, point_region({0, 0, 0}, 0), 1), InvalidArgument);
  PoseBox inverted{{1, 0, 0}, {0, 1, 1}, {0, 0, 0}, {0, 0, 0}};
  EXPECT_THROW(init_particles(5, inverted, 1), InvalidArgument);
}

TEST(Init, GaussianPriorSpread) {
  GaussianPrior prior;
  prior.mean = camera_pose_from_heading({1, 1, 1}, 0.5);
  prior.covariance = Matrix6d::Identity() * 0.01;
  const ParticleSet set = init_particles(5000, prior, 3);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : set.particles) mean += p.pose.center();
  mean /= 5000.0;
  EXPECT_LT((mean - prior.mean.center()).norm(), 0.02);
}

// ---------------------------------------------------------------- predict

TEST(Predict, NoiselessMovesEveryParticleExactly) {
  ParticleSet set = init_particles(50, PoseBox{{0, 0, 0}, {2, 2, 1}, {-3, 0, 0}, {3, 0.2, 0}}, 1);
  const ParticleSet before = set;
  const Twist delta{{0.1, -0.05, 0.3}, {0.01, 0.02, -0.03}};
  predict(set, delta, MotionNoise(), 7);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Pose expected = exp_map(delta).inverse() * before.particles[i].pose;
    EXPECT_TRUE(same_pose(set.particles[i].pose, expected, 1e-12));
    EXPECT_EQ(set.particles[i].weight, before.particles[i].weight);
  }
}

TEST(Predict, NoiseVarianceMatchesCovariance) {
  const std::size_t n = 10000;
  ParticleSet set = init_particles(n, point_region({0, 0, 1}, 0.4), 1);
  const Pose start = set.particles[0].pose;
  Vector6d sigmas;
  sigmas << 0.1, 0.05, 0.2, 0.02, 0.03, 0.01;
  predict(set, Twist{}, MotionNoise::diagonal(sigmas), 11);
  Vector6d sum = Vector6d::Zero(), sq = Vector6d::Zero();
  for (const auto& p : set.particles) {
    // Oracle: p = exp(eta)^-1 * start, so exp(eta) = start * p^-1.
    const Vector6d eta = log_map(start * p.pose.inverse()).as_vector();
    sum += eta;
    sq += eta.cwiseProduct(eta);
  }
  for (int a = 0; a < 6; ++a) {
    const double mean = sum(a) / n;
    const double var = (sq(a) - n * mean * mean) / (n - 1);
    EXPECT_NEAR(var, sigmas(a) * sigmas(a), 0.1 * sigmas(a) * sigmas(a)) << a;
  }
}

TEST(Predict, CompositionOrder) {
  ParticleSet a = init_particles(20, PoseBox{{0, 0, 0}, {2, 2, 1}, {-3, 0, 0}, {3, 0.2, 0}}, 2);
  ParticleSet b = a;
  const Twist t1{{0.2, 0.0, 0.1}, {0.0, 0.1, 0.0}}, t2{{-0.1, 0.05, 0.3}, {0.02, 0.0, -0.2}};
  predict(a, t1, MotionNoise(), 1);
  predict(a, t2, MotionNoise(), 2);
  predict(b, log_map(exp_map(t1) * exp_map(t2)), MotionNoise(), 3);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(same_pose(a.particles[i].pose, b.particles[i].pose, 1e-12));
}

TEST(Predict, DeterministicAndIndependentOfOrder) {
  ParticleSet a = init_particles(200, point_region({0, 0, 1}, 0), 1);
  ParticleSet b = a;
  const MotionNoise noise = MotionNoise::diagonal(Vector6d::Constant(0.1));
  predict(a, Twist{}, noise, 5);
  predict(b, Twist{}, noise, 5);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.particles[i].pose.translation, b.particles[i].pose.translation);
  // Particle i draws from its own substream: a prefix set sees the same noise.
  ParticleSet prefix = init_particles(10, point_region({0, 0, 1}, 0), 1);
  predict(prefix, Twist{}, noise, 5);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(prefix.particles[i].pose.translation, a.particles[i].pose.translation);
}

TEST(MotionNoise, RejectsNonPsd) {
  Matrix6d c = Matrix6d::Identity();
  c(0, 0) = -0.1;
  EXPECT_THROW(MotionNoise{c}, InvalidArgument);
  Matrix6d asym = Matrix6d::Identity();
  asym(0, 1) = 0.5;
  EXPECT_THROW(MotionNoise{asym}, InvalidArgument);
  Matrix6d singular = Matrix6d::Zero();
  singular(2, 2) = 1.0;
  EXPECT_NO_THROW(MotionNoise{singular});
}

// ---------------------------------------------------------------- weight

TEST(Likelihood, HandBuiltTwoPixelCase) {
  // n = 1, V = 2 valid pixels, L1 = 0.6; c = 1 gives sigma_l = c / (n V) = 0.5.
  const LikelihoodConfig cfg{1.0, 0.01, 1e-9};
  const LikelihoodTerm t = likelihood_from_l1(0.6, 2, 2, 1, cfg);
  EXPECT_NEAR(std::exp(t.log_likelihood), std::exp(-0.3), 1e-15);
  EXPECT_NEAR(std::exp(t.log_likelihood), 0.7408, 1e-4);
  EXPECT_FALSE(t.floored);

  // Same case end to end: one voxel splatted over a 2x1 image.
  VoxelMap map(0.2, 1);
  const std::vector<float> zero{0.0f};
  map.fuse(map.index_of({0.05, 0.05, 2.05}), zero);
  map.finalize();
  const CameraIntrinsics k{100, 100, 1, 0.5, 2, 1};
  const Pose pose(Eigen::Matrix3d::Identity(), Eigen::Vector3d(-0.1, -0.1, 0.0));
  DescriptorImage observed(2, 1, 1);
  observed.at(0, 0)[0] = 0.25f;
  observed.at(1, 0)[0] = -0.35f;
  const LikelihoodTerm e = evaluate_likelihood(map, k, pose, observed, cfg);
  EXPECT_EQ(e.valid, 2u);
  EXPECT_NEAR(e.l1, 0.6, 1e-7);
  EXPECT_NEAR(std::exp(e.log_likelihood), std::exp(-0.3), 1e-7);
}

TEST(Likelihood, EmptyViewGetsFloor) {
  const LikelihoodConfig cfg{1.0, 0.01, 1e-9};
  const LikelihoodTerm t = likelihood_from_l1(0.0, 0, 100, 3, cfg);
  EXPECT_TRUE(t.floored);
  EXPECT_NEAR(std::exp(t.log_likelihood), 1e-9, 1e-21);
  // Below the minimum valid fraction also floors.
  EXPECT_TRUE(likelihood_from_l1(0.0, 1, 1000, 3, cfg).floored);
  EXPECT_FALSE(likelihood_from_l1(0.0, 10, 1000, 3, cfg).floored);
}

TEST(Likelihood, StrictlyDecreasingInL1) {
  const LikelihoodConfig cfg;
  double prev = likelihood_from_l1(0.0, 50, 100, 4, cfg).log_likelihood;
  EXPECT_EQ(prev, 0.0);
  for (double l1 = 0.5; l1 < 100.0; l1 += 0.5) {
    const double cur = likelihood_from_l1(l1, 50, 100, 4, cfg).log_likelihood;
    EXPECT_LT(cur, prev);
    prev = cur;
  }
}

TEST(Likelihood, DimensionMismatch) {
  VoxelMap map(0.2, 2);
  map.finalize();
  const DescriptorImage observed(4, 4, 3);
  EXPECT_THROW(evaluate_likelihood(map, {4, 4, 2, 2, 4, 4}, Pose::identity(), observed, {}), InvalidArgument);
  ParticleSet set = init_particles(3, point_region({0, 0, 0}, 0), 1);
  EXPECT_THROW(weight(set, observed, map, {4, 4, 2, 2, 4, 4}, {}), InvalidArgument);
}

/// Noiseless single-frame map seen from a mapping pose.
struct MappedScene {
  World world;
  CameraIntrinsics k;
  Pose pose;
  DescriptorImage observed;
  VoxelMap map{0.2, 10};

  static WorldSpec spec() {
    WorldSpec s;
    s.ground_height = 0.1;
    s.half_x = 5.5;
    s.half_y = 4.1;
    return s;
  }
  MappedScene() : world(spec()), k(world.spec().camera) {
    const auto mapping = synth_trajectory(world, TrajectorySpec{TrajectoryKind::kFigureEight, 0.6, 0.1, 200});
    map = build_map_pipeline(world, mapping, 0.2, 0.0, 1);
    pose = mapping[37];
    observed = world.observe(k, pose, world.render_depth(k, pose), 0.0, 1, 0);
  }
};

const MappedScene& scene() {
  static const MappedScene s;
  return s;
}

TEST(Weight, MappingPoseIsMaximal) {
  const MappedScene& s = scene();
  ParticleSet set;
  set.particles.push_back({s.pose, 1.0});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 0.15);
  for (int i = 0; i < 40; ++i) {
    set.particles.push_back({exp_map(Twist{{g(rng), g(rng), g(rng)}, {0.2 * g(rng), 0.2 * g(rng), 0.2 * g(rng)}}) * s.pose, 1.0});
  }
  set.normalize();
  LikelihoodConfig cfg;
  cfg.sigma_scale = 60.0;
  std::vector<LikelihoodTerm> terms;
  weight(set, s.observed, s.map, s.k, cfg, &terms);
  for (std::size_t i = 1; i < set.size(); ++i) EXPECT_GT(set.particles[0].weight, set.particles[i].weight) << i;
  EXPECT_NEAR(set.total_weight(), 1.0, 1e-12);
  // Near-perfect agreement on the valid support: mean per-channel residual
  // stays within the field variation across a voxel.
  const double mean_abs = terms[0].l1 / (terms[0].valid * 10.0);
  EXPECT_LT(mean_abs, s.world.field().lipschitz_bound() * 0.2);
}

TEST(Weight, ThreadCountDoesNotChangeResult) {
  const MappedScene& s = scene();
  ParticleSet a = init_particles(64, HeadingGaussian{s.pose.center(), {0.2, 0.2, 0.0}, {camera_yaw(s.pose), 0.15, 0}, {0.1, 0, 0}}, 4);
  ParticleSet b = a;
  weight(a, s.observed, s.map, s.k, {}, nullptr, 1);
  weight(b, s.observed, s.map, s.k, {}, nullptr, 4);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.particles[i].weight, b.particles[i].weight);
}

TEST(Weight, AllZeroPriorIsDegenerate) {
  const MappedScene& s = scene();
  ParticleSet set = init_particles(4, point_region(s.pose.center(), 0), 1);
  for (auto& p : set.particles) p.weight = 0.0;
  EXPECT_THROW(weight(set, s.observed, s.map, s.k, {}), DegenerateWeights);
}

// ---------------------------------------------------------------- resample

TEST(Resample, SingleHeavyParticle) {
  ParticleSet set = weighted_set({0, 0, 1, 0, 0});
  bool resampled = false;
  const ParticleSet out = resample(set, 3, &resampled);
  EXPECT_TRUE(resampled);
  for (const auto& p : out.particles) {
    EXPECT_EQ(p.pose.translation.x(), 2.0);
    EXPECT_DOUBLE_EQ(p.weight, 0.2);
  }
}

TEST(Resample, UniformIsIdentity) {
  ParticleSet set = weighted_set({0.25, 0.25, 0.25, 0.25});
  bool resampled = true;
  const ParticleSet out = resample(set, 3, &resampled);
  EXPECT_FALSE(resampled);
  EXPECT_DOUBLE_EQ(effective_sample_size(set), 4.0);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(out.particles[i].pose.translation, set.particles[i].pose.translation);
}

TEST(Resample, TwoSurvivorsGetTwoCopiesEach) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const ParticleSet out = resample(weighted_set({0.5, 0.5, 0, 0}), seed);
    std::map<double, int> copies;
    for (const auto& p : out.particles) ++copies[p.pose.translation.x()];
    ASSERT_EQ(copies.size(), 2u);
    EXPECT_EQ(copies[0.0], 2);
    EXPECT_EQ(copies[1.0], 2);
  }
}

TEST(Resample, ZeroWeightsAreDegenerate) {
  EXPECT_THROW(resample(weighted_set({0, 0, 0}), 1), DegenerateWeights);
  EXPECT_THROW(systematic_resample(weighted_set({0, 0}), 1), DegenerateWeights);
}

TEST(Resample, NormalisedAfterResampling) {
  std::mt19937_64 rng(1);
  std::exponential_distribution<double> e;
  ParticleSet set;
  for (int i = 0; i < 333; ++i) set.particles.push_back({Pose(), std::pow(e(rng), 6)});
  set.normalize();
  EXPECT_NEAR(set.total_weight(), 1.0, 1e-12);
  EXPECT_NEAR(systematic_resample(set, 3).total_weight(), 1.0, 1e-12);
}

TEST(Resample, UnbiasedInExpectation) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ParticleSet set;
  for (int i = 0; i < 50; ++i) set.particles.push_back({Pose(Eigen::Matrix3d::Identity(), Eigen::Vector3d(u(rng) * 10, 0, 0)), u(rng) * u(rng)});
  set.normalize();
  auto f = [](const Pose& p) { return std::sin(p.translation.x()); };
  double target = 0.0;
  for (const auto& p : set.particles) target += p.weight * f(p.pose);
  const int trials = 1000;
  double sum = 0.0, sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    const ParticleSet out = systematic_resample(set, static_cast<std::uint64_t>(t));
    double m = 0.0;
    for (const auto& p : out.particles) m += p.weight * f(p.pose);
    sum += m;
    sq += m * m;
  }
  const double mean = sum / trials;
  const double sd = std::sqrt(std::max(0.0, sq / trials - mean * mean));
  EXPECT_LE(std::abs(mean - target), 3.0 * sd / std::sqrt(trials) + 1e-12);
}

// ---------------------------------------------------------------- mean shift

ParticleSet blob(const Eigen::Vector3d& centre, double sigma, int n, std::uint64_t seed, double yaw = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::uniform_real_distribution<double> w(0.5, 1.5);
  ParticleSet set;
  for (int i = 0; i < n; ++i) {
    set.particles.push_back({camera_pose_from_heading(centre + Eigen::Vector3d(g(rng), g(rng), g(rng)), yaw), w(rng)});
  }
  return set;
}

Eigen::Vector3d weighted_centre(const ParticleSet& s) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  double w = 0.0;
  for (const auto& p : s.particles) {
    c += p.weight * p.pose.center();
    w += p.weight;
  }
  return c / w;
}

TEST(MeanShift, SinglePose) {
  ParticleSet set = init_particles(30, point_region({1, 2, 1}, 0.7), 1);
  const auto clusters = mean_shift(set, ClusterConfig{});
  ASSERT_EQ(clusters.size(), 1u);
  EXPECT_NEAR(clusters[0].mass, 1.0, 1e-12);
  EXPECT_TRUE(same_pose(clusters[0].centroid, set.particles[0].pose, 1e-9));
}

TEST(MeanShift, TwoSeparatedBlobs) {
  ClusterConfig cfg;
  cfg.bandwidth = 0.3;
  ParticleSet a = blob({0, 0, 0}, 0.05, 200, 1), b = blob({5, 0, 0}, 0.05, 200, 2);
  ParticleSet both = a;
  both.particles.insert(both.particles.end(), b.particles.begin(), b.particles.end());
  both.normalize();
  const auto clusters = mean_shift(both, cfg);
  ASSERT_EQ(clusters.size(), 2u);
  const Eigen::Vector3d ca = weighted_centre(a), cb = weighted_centre(b);
  for (const auto& c : clusters) {
    const double da = (c.centroid.center() - ca).norm(), db = (c.centroid.center() - cb).norm();
    EXPECT_LT(std::min(da, db), cfg.bandwidth / 10.0);
  }
  EXPECT_GE(clusters[0].mass, clusters[1].mass);
}

TEST(MeanShift, SingleBlobNearWeightedMean) {
  const int n = 2000;
  const double sigma = 0.1;
  ParticleSet set = blob({1, -1, 0.5}, sigma, n, 5, 0.3);
  set.normalize();
  ClusterConfig cfg;
  cfg.bandwidth = 2.0;
  cfg.convergence_tol = 1e-9;
  cfg.max_iters = 200;
  const auto clusters = mean_shift(set, cfg);
  ASSERT_EQ(clusters.size(), 1u);
  EXPECT_LT((clusters[0].centroid.center() - weighted_centre(set)).cwiseAbs().maxCoeff(), 3.0 * sigma / std::sqrt(n));
  EXPECT_NEAR(camera_yaw(clusters[0].centroid), 0.3, 1e-9);
}

TEST(MeanShift, DensityNeverDecreasesAlongShift) {
  ParticleSet a = blob({0, 0, 0}, 0.2, 150, 7), b = blob({0.8, 0.3, 0}, 0.3, 150, 8, 0.5);
  a.particles.insert(a.particles.end(), b.particles.begin(), b.particles.end());
  a.normalize();
  ClusterConfig cfg;
  cfg.bandwidth = 0.3;
  for (std::size_t s = 0; s < a.size(); s += 15) {
    Pose at = a.particles[s].pose;
    double density = kernel_density(at, a, cfg);
    for (int it = 0; it < 30; ++it) {
      at = shift_once(at, a, cfg);
      const double next = kernel_density(at, a, cfg);
      EXPECT_GE(next, density - 1e-12 * density);
      density = next;
    }
  }
}

TEST(MeanShift, WeightedPoseMean) {
  const std::vector<Pose> poses{camera_pose_from_heading({0, 0, 0}, 0.1), camera_pose_from_heading({2, 0, 0}, 0.3)};
  const std::vector<double> w{1.0, 1.0};
  const Pose m = weighted_pose_mean(poses, w);
  EXPECT_NEAR((m.center() - Eigen::Vector3d(1, 0, 0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR(camera_yaw(m), 0.2, 1e-12);
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_THROW(weighted_pose_mean(poses, zero), DegenerateWeights);
}

TEST(MeanShift, PoseDistance) {
  const Pose a = camera_pose_from_heading({0, 0, 0}, 0.0), b = camera_pose_from_heading({3, 4, 0}, 0.5);
  const double chord = 2.0 * std::sin(0.25);
  EXPECT_NEAR(pose_distance(a, b, 2.0), std::sqrt(25.0 + 4.0 * chord * chord), 1e-12);
}

TEST(MapEstimate, PicksHeaviest) {
  const Pose p0 = camera_pose_from_heading({0, 0, 0}, 0), p1 = camera_pose_from_heading({1, 0, 0}, 0);
  std::vector<Cluster> one{{p0, 0.4, 1}};
  EXPECT_TRUE(same_pose(map_estimate(one), p0, 0.0));
  std::vector<Cluster> two{{p1, 0.3, 1}, {p0, 0.7, 1}};
  EXPECT_TRUE(same_pose(map_estimate(two), p0, 0.0));
  for (auto& c : two) c.mass *= 123.0;
  EXPECT_TRUE(same_pose(map_estimate(two), p0, 0.0));
  std::vector<Cluster> tie{{p1, 0.5, 1}, {p0, 0.5, 1}};
  EXPECT_TRUE(same_pose(map_estimate(tie), p1, 0.0));
  EXPECT_THROW(map_estimate(std::vector<Cluster>{}), InsufficientData);
}

// ---------------------------------------------------------------- step

TEST(Step, NoiselessClosedLoopTracksTruth) {
  const MappedScene& s = scene();
  const World& world = s.world;
  const auto test = synth_trajectory(world, TrajectorySpec{TrajectoryKind::kFigureEight, 1.0, 0.1, 15, {0, 0}, 3.0, 0.0, 0.37});
  const auto motions = relative_motions(test);
  FilterConfig cfg;
  cfg.likelihood.sigma_scale = 60.0;
  cfg.cluster.bandwidth = 0.25;
  ParticleSet set = init_particles(200, HeadingGaussian{test[0].center(), {0.05, 0.05, 0}, {camera_yaw(test[0]), 0.15, 0}, {0.02, 0, 0}}, 3);
  for (std::size_t t = 0; t < test.size(); ++t) {
    const DescriptorImage obs = world.observe(s.k, test[t], world.render_depth(s.k, test[t]), 0.0, 9, t);
    const auto motion = t == 0 ? std::nullopt : std::optional<Twist>(motions[t]);
    const StepResult r = filter_step(set, motion, obs, s.map, s.k, cfg, hash_combine(3, t));
    EXPECT_LT((r.estimate.center() - test[t].center()).norm(), 0.2) << t;
    EXPECT_NEAR(set.total_weight(), 1.0, 1e-12);
    EXPECT_EQ(r.diagnostics.particles, 200u);
    EXPECT_GE(r.diagnostics.n_clusters, 1u);
  }
}

TEST(Step, BitIdenticalUnderSeed) {
  const MappedScene& s = scene();
  FilterConfig cfg;
  cfg.noise = MotionNoise::diagonal(Vector6d::Constant(0.01));
  const HeadingGaussian prior{s.pose.center(), {0.2, 0.2, 0}, {camera_yaw(s.pose), 0.15, 0}, {0.1, 0, 0}};
  ParticleSet a = init_particles(100, prior, 1), b = init_particles(100, prior, 1);
  const Twist motion{{0, 0, 0.1}, {0, 0.01, 0}};
  cfg.max_threads = 1;
  const StepResult ra = filter_step(a, motion, s.observed, s.map, s.k, cfg, 42);
  cfg.max_threads = 3;
  const StepResult rb = filter_step(b, motion, s.observed, s.map, s.k, cfg, 42);
  EXPECT_EQ(ra.estimate.rotation, rb.estimate.rotation);
  EXPECT_EQ(ra.estimate.translation, rb.estimate.translation);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.particles[i].pose.translation, b.particles[i].pose.translation);
    EXPECT_EQ(a.particles[i].weight, b.particles[i].weight);
  }
}

}  // namespace
}  // namespace featloc
