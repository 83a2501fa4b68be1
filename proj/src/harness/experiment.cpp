#include "featloc/harness/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "featloc/common/error.hpp"
#include "featloc/common/random.hpp"
#include "featloc/vo/visual_odometry.hpp"

namespace featloc {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}


struct KeyBinding {
  std::string key;
  std::string description;
  std::function<void(ExperimentConfig&, const KeyValueConfig&, const std::string&)> apply;
};

const std::vector<KeyBinding>& bindings() {
  using C = ExperimentConfig;
  using K = KeyValueConfig;
  auto d = [](double C::*field) {
    return [field](C& c, const K& kv, const std::string& k) { c.*field = kv.get_double(k, c.*field); };
  };
  auto traj = [](TrajectorySpec C::*which, double TrajectorySpec::*field) {
    return [which, field](C& c, const K& kv, const std::string& k) {
      (c.*which).*field = kv.get_double(k, (c.*which).*field);
    };
  };
  auto traj_frames = [](TrajectorySpec C::*which) {
    return [which](C& c, const K& kv, const std::string& k) {
      (c.*which).frames = static_cast<int>(kv.get_int(k, (c.*which).frames));
    };
  };
  auto traj_kind = [](TrajectorySpec C::*which) {
    return [which](C& c, const K& kv, const std::string& k) {
      (c.*which).kind = parse_trajectory_kind(kv.get_string(k, to_string((c.*which).kind)));
    };
  };
  auto motion = [](int i) {
    return [i](C& c, const K& kv, const std::string& k) { c.motion_sigma(i) = kv.get_double(k, c.motion_sigma(i)); };
  };
  auto world_d = [](double WorldSpec::*field) {
    return [field](C& c, const K& kv, const std::string& k) { c.world.*field = kv.get_double(k, c.world.*field); };
  };

  static const std::vector<KeyBinding> table = {
      {"seed", "run seed (noise, particles, RANSAC)",
       [](C& c, const K& kv, const std::string& k) { c.seed = static_cast<std::uint64_t>(kv.get_int(k, c.seed)); }},
      {"map_seed", "seed of the mapping-pass descriptor noise",
       [](C& c, const K& kv, const std::string& k) { c.map_seed = static_cast<std::uint64_t>(kv.get_int(k, c.map_seed)); }},
      {"world_seed", "seed of the world layout and descriptor field",
       [](C& c, const K& kv, const std::string& k) {
         c.world.seed = static_cast<std::uint64_t>(kv.get_int(k, c.world.seed));
         c.world.field.seed = hash_combine(c.world.seed, 0x6669656c64ULL);
       }},
      {"threads", "worker threads for particle weighting (0 = all cores)",
       [](C& c, const K& kv, const std::string& k) { c.threads = static_cast<unsigned>(kv.get_int(k, c.threads)); }},
      {"world_half_x", "yard half extent along x (m)", world_d(&WorldSpec::half_x)},
      {"world_half_y", "yard half extent along y (m)", world_d(&WorldSpec::half_y)},
      {"wall_height", "wall height (m)", world_d(&WorldSpec::wall_height)},
      {"ground_height", "z of the ground plane (m)", world_d(&WorldSpec::ground_height)},
      {"clear_half_x", "half extent of the box-free centre along x (m)", world_d(&WorldSpec::clear_half_x)},
      {"clear_half_y", "half extent of the box-free centre along y (m)", world_d(&WorldSpec::clear_half_y)},
      {"boxes", "number of random boxes",
       [](C& c, const K& kv, const std::string& k) { c.world.box_count = static_cast<int>(kv.get_int(k, c.world.box_count)); }},
      {"nuisance", "amplitude of the appearance-change bias field", world_d(&WorldSpec::nuisance_amplitude)},
      {"descriptor_dim", "descriptor channels n",
       [](C& c, const K& kv, const std::string& k) { c.world.field.dim = static_cast<int>(kv.get_int(k, c.world.field.dim)); }},
      {"camera_width", "render width (px); intrinsics scale with it",
       [](C& c, const K& kv, const std::string& k) {
         const double s = static_cast<double>(kv.get_int(k, c.world.camera.width)) / c.world.camera.width;
         c.world.camera = c.world.camera.scaled(s);
       }},
      {"voxel_size", "map voxel edge (m)", d(&C::voxel_size)},
      {"map_sigma", "descriptor noise sigma while mapping", d(&C::map_noise_sigma)},
      {"obs_sigma", "descriptor noise sigma while localising", d(&C::obs_noise_sigma)},
      {"mapping_kind", "straight | arc | figure-eight", traj_kind(&C::mapping)},
      {"mapping_frames", "mapping frames", traj_frames(&C::mapping)},
      {"mapping_speed", "mapping speed (m/s)", traj(&C::mapping, &TrajectorySpec::speed)},
      {"mapping_offset", "mapping start offset along the path (m)", traj(&C::mapping, &TrajectorySpec::start_offset)},
      {"trajectory", "test trajectory: straight | arc | figure-eight", traj_kind(&C::test)},
      {"frames", "test frames", traj_frames(&C::test)},
      {"speed", "test speed (m/s)", traj(&C::test, &TrajectorySpec::speed)},
      {"dt", "frame interval (s)",
       [](C& c, const K& kv, const std::string& k) {
         c.test.dt = c.mapping.dt = c.vo.dt = kv.get_double(k, c.test.dt);
       }},
      {"start_offset", "test start offset along the path (m)", traj(&C::test, &TrajectorySpec::start_offset)},
      {"path_scale", "arc radius / figure-eight half width (m)",
       [](C& c, const K& kv, const std::string& k) { c.test.scale = c.mapping.scale = kv.get_double(k, c.test.scale); }},
      {"camera_height", "camera height (m)",
       [](C& c, const K& kv, const std::string& k) { c.test.height = c.mapping.height = kv.get_double(k, c.test.height); }},
      {"camera_pitch", "downward camera pitch (rad)",
       [](C& c, const K& kv, const std::string& k) { c.test.pitch = c.mapping.pitch = kv.get_double(k, c.test.pitch); }},
      {"particles", "particle count",
       [](C& c, const K& kv, const std::string& k) { c.particles = static_cast<std::size_t>(kv.get_int(k, c.particles)); }},
      {"init", "tracking | global",
       [](C& c, const K& kv, const std::string& k) {
         const std::string v = kv.get_string(k, c.init == InitMode::kGlobal ? "global" : "tracking");
         if (v != "tracking" && v != "global") throw InvalidArgument("init must be tracking or global");
         c.init = v == "global" ? InitMode::kGlobal : InitMode::kTracking;
       }},
      {"init_position_sigma", "tracking prior position sigma (m)", d(&C::init_position_sigma)},
      {"init_yaw_sigma", "tracking prior yaw sigma (rad)", d(&C::init_yaw_sigma)},
      {"sigma_l_c", "likelihood sharpness c: log L = -c * mean |f - f_hat|",
       [](C& c, const K& kv, const std::string& k) { c.likelihood.sigma_scale = kv.get_double(k, c.likelihood.sigma_scale); }},
      {"likelihood_floor", "likelihood of views with too little map coverage",
       [](C& c, const K& kv, const std::string& k) { c.likelihood.floor_likelihood = kv.get_double(k, c.likelihood.floor_likelihood); }},
      {"min_valid_fraction", "coverage below which the floor applies",
       [](C& c, const K& kv, const std::string& k) {
         c.likelihood.min_valid_fraction = kv.get_double(k, c.likelihood.min_valid_fraction);
       }},
      {"bandwidth", "mean-shift bandwidth (m)",
       [](C& c, const K& kv, const std::string& k) { c.cluster.bandwidth = kv.get_double(k, c.cluster.bandwidth); }},
      {"rotation_weight", "metres per radian in the pose distance",
       [](C& c, const K& kv, const std::string& k) {
         c.cluster.rotation_weight = kv.get_double(k, c.cluster.rotation_weight);
       }},
      {"max_seeds", "mean-shift starting points",
       [](C& c, const K& kv, const std::string& k) {
         c.cluster.max_seeds = static_cast<std::size_t>(kv.get_int(k, c.cluster.max_seeds));
       }},
      {"motion_sigma_x", "motion noise, camera x (m)", motion(0)},
      {"motion_sigma_y", "motion noise, camera y (m)", motion(1)},
      {"motion_sigma_z", "motion noise, camera z (m)", motion(2)},
      {"motion_sigma_rx", "motion noise about camera x (rad)", motion(3)},
      {"motion_sigma_ry", "motion noise about camera y (rad)", motion(4)},
      {"motion_sigma_rz", "motion noise about camera z (rad)", motion(5)},
      {"vo", "internal | oracle",
       [](C& c, const K& kv, const std::string& k) {
         const std::string v = kv.get_string(k, c.vo_mode == VoMode::kOracle ? "oracle" : "internal");
         if (v != "internal" && v != "oracle") throw InvalidArgument("vo must be internal or oracle");
         c.vo_mode = v == "oracle" ? VoMode::kOracle : VoMode::kInternal;
       }},
      {"ransac_iters", "RANSAC iterations",
       [](C& c, const K& kv, const std::string& k) { c.vo.ransac_iters = static_cast<int>(kv.get_int(k, c.vo.ransac_iters)); }},
      {"inlier_threshold", "symmetric epipolar distance threshold (normalised)",
       [](C& c, const K& kv, const std::string& k) { c.vo.inlier_threshold = kv.get_double(k, c.vo.inlier_threshold); }},
      {"expected_speed", "speed assumed by the monocular scale model (m/s)",
       [](C& c, const K& kv, const std::string& k) { c.vo.expected_speed = kv.get_double(k, c.vo.expected_speed); }},
      {"vo_camera_scale", "matcher resolution relative to the render",
       [](C& c, const K& kv, const std::string& k) {
         c.vo_camera_scale = static_cast<int>(kv.get_int(k, c.vo_camera_scale));
       }},
      {"vo_matches", "correspondences per frame pair",
       [](C& c, const K& kv, const std::string& k) { c.matches.count = static_cast<int>(kv.get_int(k, c.matches.count)); }},
      {"vo_pixel_noise", "match noise sigma (matcher pixels)",
       [](C& c, const K& kv, const std::string& k) { c.matches.pixel_noise = kv.get_double(k, c.matches.pixel_noise); }},
      {"vo_outliers", "fraction of random matches",
       [](C& c, const K& kv, const std::string& k) {
         c.matches.outlier_fraction = kv.get_double(k, c.matches.outlier_fraction);
       }},
      {"oracle_translation_sigma", "oracle motion noise (m)", d(&C::oracle_translation_sigma)},
      {"oracle_rotation_sigma", "oracle motion noise (rad)", d(&C::oracle_rotation_sigma)},
      {"kidnap_frame", "frame at which the belief is wiped (-1: never)",
       [](C& c, const K& kv, const std::string& k) { c.kidnap_frame = static_cast<int>(kv.get_int(k, c.kidnap_frame)); }},
      {"global_particles", "particle count after a global re-initialisation (0: particles)",
       [](C& c, const K& kv, const std::string& k) {
         c.global_particles = static_cast<std::size_t>(kv.get_int(k, c.global_particles));
       }},
      {"convergence_radius", "translation error that counts as converged (0: 3 voxels)", d(&C::convergence_radius)},
      {"convergence_hold", "frames the error must stay within the radius",
       [](C& c, const K& kv, const std::string& k) {
         c.convergence_hold = static_cast<int>(kv.get_int(k, c.convergence_hold));
       }},
  };
  return table;
}

void validate(const ExperimentConfig& c) {
  if (!(c.voxel_size > 0.0)) throw InvalidArgument("voxel_size must be positive");
  if (c.particles == 0) throw InvalidArgument("particles must be positive");
  if (c.map_noise_sigma < 0.0 || c.obs_noise_sigma < 0.0) throw InvalidArgument("noise sigma must be non-negative");
  if (c.vo_camera_scale < 1) throw InvalidArgument("vo_camera_scale must be >= 1");
  if (c.matches.count < 8 || c.matches.outlier_fraction < 0.0 || c.matches.outlier_fraction >= 1.0) {
    throw InvalidArgument("need >= 8 matches and an outlier fraction in [0, 1)");
  }
  if (c.motion_sigma.minCoeff() < 0.0) throw InvalidArgument("motion sigma must be non-negative");
  if (c.convergence_hold < 1) throw InvalidArgument("convergence_hold must be >= 1");
}

}  // namespace

ExperimentConfig default_experiment() {
  ExperimentConfig c;
  c.world.half_x = 5.5;
  // Ground and walls sit on voxel centres of the default 0.2 m grid, so the
  // map carries no half-voxel offset of the dominant surfaces.
  c.world.half_y = 4.1;
  c.world.ground_height = 0.1;
  c.world.clear_half_x = 4.0;
  c.world.clear_half_y = 2.2;

  c.mapping.kind = TrajectoryKind::kFigureEight;
  c.mapping.scale = 3.5;
  c.mapping.speed = 0.6;
  c.mapping.frames = 400;

  c.test = c.mapping;
  c.test.speed = 1.5;
  c.test.frames = 200;
  c.test.start_offset = 0.37;

  c.likelihood.sigma_scale = 60.0;
  c.likelihood.min_valid_fraction = 0.05;
  c.likelihood.floor_likelihood = 1e-30;
  c.cluster.bandwidth = 0.25;
  c.cluster.rotation_weight = 1.0;
  c.cluster.max_seeds = 30;
  c.motion_sigma << 0.03, 0.005, 0.03, 0.004, 0.015, 0.004;

  c.vo.inlier_threshold = 3e-3;
  c.vo.expected_speed = c.test.speed;
  c.vo.dt = c.test.dt;
  return c;
}

PoseBox global_region(const ExperimentConfig& cfg) {
  PoseBox box;
  const double z = cfg.world.ground_height + cfg.test.height;
  box.position_min = {-cfg.world.clear_half_x, -cfg.world.clear_half_y, z};
  box.position_max = {cfg.world.clear_half_x, cfg.world.clear_half_y, z};
  box.angles_min = {-std::numbers::pi, cfg.test.pitch, 0.0};
  box.angles_max = {std::numbers::pi, cfg.test.pitch, 0.0};
  return box;
}

namespace {

HeadingGaussian tracking_region(const ExperimentConfig& cfg, const Pose& start) {
  HeadingGaussian g;
  g.position_mean = start.center();
  g.position_sigma = {cfg.init_position_sigma, cfg.init_position_sigma, 0.0};
  g.angles_mean = {camera_yaw(start), cfg.test.pitch, 0.0};
  g.angles_sigma = {cfg.init_yaw_sigma, 0.0, 0.0};
  return g;
}

int find_convergence(const std::vector<FrameRecord>& frames, int from, double radius, int hold) {
  const int n = static_cast<int>(frames.size());
  for (int f = std::max(0, from); f < n; ++f) {
    const int last = std::min(n, f + hold);
    bool ok = true;
    for (int g = f; g < last && ok; ++g) ok = frames[g].translation_error <= radius;
    if (ok) return f;
  }
  return -1;
}

}  // namespace

ExperimentConfig experiment_from_config(const KeyValueConfig& kv) {
  ExperimentConfig c = default_experiment();
  const auto& table = bindings();
  for (const auto& key : kv.keys()) {
    const bool known = std::any_of(table.begin(), table.end(), [&](const KeyBinding& b) { return b.key == key; });
    if (!known) throw InvalidArgument("unknown config key '" + key + "'");
  }
  // Speed-coupled defaults follow the test trajectory unless set explicitly.
  for (const auto& b : table) {
    if (kv.has(b.key)) b.apply(c, kv, b.key);
  }
  if (!kv.has("expected_speed")) c.vo.expected_speed = c.test.speed;
  c.vo.dt = c.test.dt;
  validate(c);
  return c;
}

const std::vector<std::pair<std::string, std::string>>& experiment_config_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys = [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& b : bindings()) out.emplace_back(b.key, b.description);
    return out;
  }();
  return keys;
}

VoxelMap build_map_pipeline(const World& world, std::span<const Pose> mapping, double voxel_size, double sigma,
                            std::uint64_t seed) {
  const CameraIntrinsics& k = world.spec().camera;
  VoxelMap map(voxel_size, world.field().dim());
  for (std::size_t i = 0; i < mapping.size(); ++i) {
    const DepthImage depth = world.render_depth(k, mapping[i]);
    const DescriptorImage desc = world.observe(k, mapping[i], depth, sigma, seed, i);
    map.insert_observation({desc, depth, k, mapping[i]});
  }
  map.finalize();
  return map;
}

std::vector<Match2D2D> synth_matches(const World& world, const CameraIntrinsics& k, const Pose& previous,
                                     const Pose& current, const MatchSynthOptions& options, std::uint64_t seed) {
  StreamRng rng(seed, 0x6d61746368ULL);
  std::normal_distribution<double> noise(0.0, options.pixel_noise);
  const int outliers = static_cast<int>(std::lround(options.count * options.outlier_fraction));
  const int wanted = options.count - outliers;

  const Eigen::Matrix3d rt = previous.rotation.transpose();
  const Eigen::Vector3d c1 = previous.center();
  const Eigen::Vector3d c2 = current.center();
  std::vector<Match2D2D> out;
  out.reserve(options.count);
  for (int attempt = 0; static_cast<int>(out.size()) < wanted && attempt < 50 * options.count; ++attempt) {
    const Eigen::Vector2d p1(k.width * rng.uniform(), k.height * rng.uniform());
    const Eigen::Vector3d ray((p1.x() - k.cx) / k.fx, (p1.y() - k.cy) / k.fy, 1.0);
    const Eigen::Vector3d dir = rt * ray;
    const double s = world.raycast(c1, dir);
    if (!std::isfinite(s)) continue;
    const Eigen::Vector3d x = c1 + s * dir;
    const auto p2 = project(x, k, current);
    if (!p2) continue;
    // Occluded in the second view when something is hit before x.
    if (world.raycast(c2, x - c2) < 1.0 - 1e-6) continue;
    Match2D2D m;
    m.p1 = p1 + Eigen::Vector2d(noise(rng), noise(rng));
    m.p2 = p2->uv() + Eigen::Vector2d(noise(rng), noise(rng));
    out.push_back(m);
  }
  for (int i = 0; i < outliers; ++i) {
    Match2D2D m;
    m.p1 = {k.width * rng.uniform(), k.height * rng.uniform()};
    m.p2 = {k.width * rng.uniform(), k.height * rng.uniform()};
    out.push_back(m);
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

std::vector<Pose> RunReport::estimates() const {
  std::vector<Pose> out;
  for (const auto& f : frames) out.push_back(f.estimate);
  return out;
}

std::vector<Pose> RunReport::truths() const {
  std::vector<Pose> out;
  for (const auto& f : frames) out.push_back(f.truth);
  return out;
}

std::vector<Pose> RunReport::odometry_poses() const {
  std::vector<Pose> out;
  for (const auto& f : frames) out.push_back(f.odometry);
  return out;
}

RunReport run_localization(const World& world, const VoxelMap& map, std::span<const Pose> test,
                           const ExperimentConfig& cfg, std::uint64_t seed, const std::vector<Twist>* motions) {
  validate(cfg);
  if (test.empty()) throw InvalidArgument("empty test trajectory");
  if (motions != nullptr && motions->size() < test.size()) {
    throw InvalidArgument("need one motion per frame, got " + std::to_string(motions->size()));
  }
  if (map.descriptor_dim() != world.field().dim()) throw InvalidArgument("map and world descriptor dims differ");

  const CameraIntrinsics& k = cfg.camera();
  const CameraIntrinsics vo_k = k.scaled(cfg.vo_camera_scale);
  FilterConfig fcfg;
  fcfg.likelihood = cfg.likelihood;
  fcfg.cluster = cfg.cluster;
  fcfg.noise = MotionNoise::diagonal(cfg.motion_sigma);
  fcfg.max_threads = cfg.threads;

  const std::vector<Pose> truth(test.begin(), test.end());
  const std::vector<Twist> true_motion = relative_motions(truth);

  RunReport report;
  ParticleSet particles =
      cfg.init == InitMode::kGlobal
          ? init_particles(cfg.particles, global_region(cfg), hash_combine(seed, 0x696e6974ULL))
          : init_particles(cfg.particles, tracking_region(cfg, truth.front()), hash_combine(seed, 0x696e6974ULL));

  // The filter's odometry is scaled by a speed model fed with MCL
  // displacements; the baseline has no filter and keeps the prior speed.
  SpeedModel speed(cfg.vo.expected_speed);
  Pose odometry = truth.front();
  Twist last_motion;
  last_motion.translational = Eigen::Vector3d(0.0, 0.0, cfg.vo.expected_speed * cfg.vo.dt);
  Twist last_odometry = last_motion;
  std::optional<Eigen::Vector3d> last_estimate;

  for (std::size_t t = 0; t < truth.size(); ++t) {
    FrameRecord rec;
    rec.truth = truth[t];
    const auto frame_start = Clock::now();

    auto clock = Clock::now();
    const DepthImage depth = world.render_depth(k, truth[t]);
    const DescriptorImage observed =
        world.observe(k, truth[t], depth, cfg.obs_noise_sigma, hash_combine(seed, 0x6f6273ULL), t);
    rec.timing.observe = ms_since(clock);

    std::optional<Twist> motion;
    clock = Clock::now();
    if (t > 0) {
      if (motions != nullptr) {
        motion = (*motions)[t];
      } else if (cfg.vo_mode == VoMode::kOracle) {
        StreamRng rng(seed, 0x6f7261636c65ULL, t);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Twist m = true_motion[t];
        for (int a = 0; a < 3; ++a) m.translational(a) += cfg.oracle_translation_sigma * gauss(rng);
        for (int a = 0; a < 3; ++a) m.rotational(a) += cfg.oracle_rotation_sigma * gauss(rng);
        motion = m;
      } else {
        const auto matches = synth_matches(world, vo_k, truth[t - 1], truth[t], cfg.matches,
                                           hash_combine(seed, 0x766f6d ^ t));
        VoConfig vcfg = cfg.vo;
        vcfg.seed = hash_combine(seed, 0x72616e ^ t);
        Twist odo;
        try {
          const VoStepResult step = vo_step(matches, vo_k, vcfg, speed.speed());
          motion = step.motion;
          odo = step.motion;
          odo.translational = step.motion.translational.normalized() * cfg.vo.expected_speed * cfg.vo.dt;
          rec.vo_inliers = step.inliers;
          rec.vo_low_confidence = step.low_confidence;
        } catch (const Error&) {
          // Constant-velocity fallback.
          motion = last_motion;
          odo = last_odometry;
          rec.vo_failed = true;
        }
        last_odometry = odo;
      }
      last_motion = *motion;
      const bool scaled_here = motions == nullptr && cfg.vo_mode == VoMode::kInternal;
      odometry = exp_map(scaled_here ? last_odometry : *motion).inverse() * odometry;
    }
    rec.vo_speed = speed.speed();
    rec.timing.vo = ms_since(clock);

    if (cfg.kidnap_frame >= 0 && static_cast<std::size_t>(cfg.kidnap_frame) == t) {
      const std::size_t n = cfg.global_particles > 0 ? cfg.global_particles : cfg.particles;
      particles = init_particles(n, global_region(cfg), hash_combine(seed, 0x6b69646eULL));
      motion.reset();
      report.reset_frame = static_cast<int>(t);
    }

    const StepResult step =
        filter_step(particles, motion, observed, map, k, fcfg, hash_combine(hash_combine(seed, 0x66696c74ULL), t));
    rec.estimate = step.estimate;
    const Eigen::Vector3d centre = step.estimate.center();
    if (last_estimate && t > 0 && static_cast<int>(t) != cfg.kidnap_frame) {
      speed.update((centre - *last_estimate).norm() / cfg.vo.dt);
    }
    last_estimate = centre;
    rec.filter = step.diagnostics;
    rec.odometry = odometry;
    rec.translation_error = (rec.estimate.center() - rec.truth.center()).norm();
    rec.rotation_error = rotation_angle(rec.estimate.rotation, rec.truth.rotation);
    rec.odometry_error = (rec.odometry.center() - rec.truth.center()).norm();
    rec.timing.predict = step.diagnostics.ms_predict;
    rec.timing.weight = step.diagnostics.ms_weight;
    rec.timing.cluster = step.diagnostics.ms_cluster;
    rec.timing.resample = step.diagnostics.ms_resample;
    rec.timing.particles = particles.size();
    rec.timing.wall = ms_since(frame_start);
    report.frames.push_back(rec);
  }

  const std::vector<Pose> est = report.estimates();
  report.filter = ate_rmse(est, truth);
  report.odometry = ate_rmse(report.odometry_poses(), truth);
  report.convergence_frame =
      find_convergence(report.frames, report.reset_frame, cfg.effective_convergence_radius(), cfg.convergence_hold);
  std::vector<FrameTiming> timings;
  for (const auto& f : report.frames) timings.push_back(f.timing);
  report.timing = summarize_timing(timings);
  return report;
}

SequenceResult localize_sequence(const VoxelMap& map, const CameraIntrinsics& k,
                                 std::span<const DescriptorImage> frames, std::span<const Twist> motions,
                                 const ExperimentConfig& cfg, const InitRegion& init, std::uint64_t seed) {
  validate(cfg);
  if (frames.empty()) throw InvalidArgument("no frames");
  const std::size_t offset = motions.size() == frames.size() ? 0 : 1;
  if (motions.size() + offset != frames.size()) {
    throw InvalidArgument("expected " + std::to_string(frames.size() - 1) + " or " + std::to_string(frames.size()) +
                          " motions, got " + std::to_string(motions.size()));
  }
  for (const auto& f : frames) {
    if (f.width() != k.width || f.height() != k.height) throw InvalidArgument("frame size does not match the camera");
  }
  FilterConfig fcfg;
  fcfg.likelihood = cfg.likelihood;
  fcfg.cluster = cfg.cluster;
  fcfg.noise = MotionNoise::diagonal(cfg.motion_sigma);
  fcfg.max_threads = cfg.threads;

  ParticleSet particles = init_particles(cfg.particles, init, hash_combine(seed, 0x696e6974ULL));
  SequenceResult out;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    std::optional<Twist> motion;
    if (t > 0) motion = motions[t - 1 + offset];
    const auto start = Clock::now();
    StepResult step =
        filter_step(particles, motion, frames[t], map, k, fcfg, hash_combine(hash_combine(seed, 0x66696c74ULL), t));
    step.diagnostics.ms_total = ms_since(start);
    out.estimates.push_back(step.estimate);
    out.diagnostics.push_back(step.diagnostics);
  }
  return out;
}

void save_sequence_diagnostics_csv(const SequenceResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "frame,particles,n_eff,n_clusters,ms_predict,ms_weight,ms_resample,ms_cluster,ms_wall\n";
  out << std::setprecision(10);
  for (std::size_t i = 0; i < result.diagnostics.size(); ++i) {
    const auto& d = result.diagnostics[i];
    out << i << ',' << d.particles << ',' << d.n_eff << ',' << d.n_clusters << ',' << d.ms_predict << ',' << d.ms_weight << ','
        << d.ms_resample << ',' << d.ms_cluster << ',' << d.ms_total << '\n';
  }
}

ExperimentSetup prepare_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  World world(cfg.world);
  std::vector<Pose> mapping = synth_trajectory(world, cfg.mapping);
  std::vector<Pose> test = synth_trajectory(world, cfg.test);
  VoxelMap map = build_map_pipeline(world, mapping, cfg.voxel_size, cfg.map_noise_sigma, cfg.map_seed);
  return {std::move(world), std::move(mapping), std::move(test), std::move(map)};
}

void save_diagnostics_csv(const RunReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "frame,true_x,true_y,true_z,est_x,est_y,est_z,trans_err,rot_err,odom_err,n_eff,resampled,"
         "n_clusters,vo_inliers,vo_low_confidence,vo_failed,vo_speed,particles,ms_observe,ms_vo,ms_predict,ms_weight,"
         "ms_resample,ms_cluster,ms_wall\n";
  out << std::setprecision(10);
  for (std::size_t i = 0; i < report.frames.size(); ++i) {
    const auto& f = report.frames[i];
    const Eigen::Vector3d tc = f.truth.center();
    const Eigen::Vector3d ec = f.estimate.center();
    out << i << ',' << tc.x() << ',' << tc.y() << ',' << tc.z() << ',' << ec.x() << ',' << ec.y() << ',' << ec.z()
        << ',' << f.translation_error << ',' << f.rotation_error << ',' << f.odometry_error << ','
        << f.filter.n_eff << ',' << f.filter.resampled << ',' << f.filter.n_clusters << ',' << f.vo_inliers << ','
        << f.vo_low_confidence << ',' << f.vo_failed << ',' << f.vo_speed << ',' << f.timing.particles << ','
        << f.timing.observe << ',' << f.timing.vo << ',' << f.timing.predict << ',' << f.timing.weight << ','
        << f.timing.resample << ',' << f.timing.cluster << ',' << f.timing.wall << '\n';
  }
}

std::vector<FrameTiming> load_timing_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("missing header", line_no);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  auto column = [&](const std::string& name, bool required) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      if (required) throw ParseError("missing column " + name, 1);
      return kAbsent;
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_particles = column("particles", false), c_observe = column("ms_observe", false),
                    c_vo = column("ms_vo", false), c_predict = column("ms_predict", true),
                    c_weight = column("ms_weight", true), c_cluster = column("ms_cluster", true),
                    c_resample = column("ms_resample", true), c_wall = column("ms_wall", false);
  std::vector<FrameTiming> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(cell, &used));
        if (used != cell.size() && cell.find_first_not_of(" \r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError("malformed number '" + cell + "'", line_no);
      }
    }
    if (v.size() != header.size()) throw ParseError("wrong column count", line_no);
    auto at = [&](std::size_t c) { return c == kAbsent ? 0.0 : v[c]; };
    FrameTiming t;
    t.particles = static_cast<std::size_t>(at(c_particles));
    t.observe = at(c_observe);
    t.vo = at(c_vo);
    t.predict = v[c_predict];
    t.weight = v[c_weight];
    t.cluster = v[c_cluster];
    t.resample = v[c_resample];
    t.wall = c_wall == kAbsent ? t.stage_sum() : v[c_wall];
    rows.push_back(t);
  }
  return rows;
}

}  // namespace featloc
