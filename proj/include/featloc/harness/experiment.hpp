#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "featloc/featmap/voxel_map.hpp"
#include "featloc/harness/config.hpp"
#include "featloc/harness/metrics.hpp"
#include "featloc/harness/timing_report.hpp"
#include "featloc/harness/trajectory.hpp"
#include "featloc/harness/world.hpp"
#include "featloc/mcl/filter.hpp"
#include "featloc/vo/essential.hpp"

namespace featloc {

enum class VoMode { kInternal, kOracle };
enum class InitMode { kTracking, kGlobal };

struct MatchSynthOptions {
  int count = 200;
  double pixel_noise = 0.5;
  double outlier_fraction = 0.2;
};

/// Everything one localisation run depends on. Keys of the text config are
/// listed by experiment_config_keys().
struct ExperimentConfig {
  WorldSpec world;
  double voxel_size = 0.2;
  double map_noise_sigma = 0.05;
  TrajectorySpec mapping;
  TrajectorySpec test;

  double obs_noise_sigma = 0.05;
  std::size_t particles = 500;
  InitMode init = InitMode::kTracking;
  double init_position_sigma = 0.2;
  double init_yaw_sigma = 0.05;
  LikelihoodConfig likelihood;
  ClusterConfig cluster;
  /// Per-frame motion noise, translation (m) then rotation (rad), in the
  /// camera frame.
  Vector6d motion_sigma = Vector6d::Zero();

  VoMode vo_mode = VoMode::kInternal;
  VoConfig vo;
  /// The matcher works on a camera this many times finer than the render.
  int vo_camera_scale = 10;
  MatchSynthOptions matches;
  double oracle_translation_sigma = 0.0;
  double oracle_rotation_sigma = 0.0;

  /// Frame at which the belief is wiped and re-initialised over the whole
  /// free yard (-1: never). `global_particles` (0: `particles`) sets the
  /// particle count from then on.
  int kidnap_frame = -1;
  std::size_t global_particles = 0;
  /// Translation error (m) that counts as converged; 0 means 3 voxels.
  double convergence_radius = 0.0;
  int convergence_hold = 3;

  std::uint64_t seed = 1;
  std::uint64_t map_seed = 1;
  unsigned threads = 0;

  /// CameraIntrinsics used for rendering and matching.
  const CameraIntrinsics& camera() const { return world.camera; }
  double effective_convergence_radius() const {
    return convergence_radius > 0.0 ? convergence_radius : 3.0 * voxel_size;
  }
};

/// The desk-scale experiment: 64x48 camera, n = 10, 0.2 m voxels, 500
/// particles, a 200-frame figure-eight test drive.
ExperimentConfig default_experiment();

/// Default desk-scale experiment; overrides come from `cfg`. Unknown keys
/// and unparsable values throw InvalidArgument.
ExperimentConfig experiment_from_config(const KeyValueConfig& cfg);

/// (key, description) for every recognised config key.
const std::vector<std::pair<std::string, std::string>>& experiment_config_keys();

/// Depth render + noisy descriptors for every mapping pose, fused into a
/// finalized map.
VoxelMap build_map_pipeline(const World& world, std::span<const Pose> mapping, double voxel_size, double sigma,
                            std::uint64_t seed);

/// Noisy correspondences between two ground-truth frames on camera `k`.
/// A fraction of them are replaced by random pixel pairs.
std::vector<Match2D2D> synth_matches(const World& world, const CameraIntrinsics& k, const Pose& previous,
                                     const Pose& current, const MatchSynthOptions& options, std::uint64_t seed);

struct FrameRecord {
  Pose truth;
  Pose estimate;
  /// Dead-reckoned pose from the same motions, without the filter.
  Pose odometry;
  double translation_error = 0.0;
  double rotation_error = 0.0;
  double odometry_error = 0.0;
  StepDiagnostics filter;
  std::size_t vo_inliers = 0;
  bool vo_low_confidence = false;
  bool vo_failed = false;
  /// Speed (m/s) used to scale this frame's odometry.
  double vo_speed = 0.0;
  FrameTiming timing;
};

struct RunReport {
  std::vector<FrameRecord> frames;
  AteResult filter;
  AteResult odometry;
  /// Frame at which the filter belief was last (re)initialised.
  int reset_frame = 0;
  /// First frame >= reset_frame from which the translation error stays
  /// within the convergence radius for `convergence_hold` frames; -1 if never.
  int convergence_frame = -1;
  TimingSummary timing;

  std::vector<Pose> estimates() const;
  std::vector<Pose> truths() const;
  std::vector<Pose> odometry_poses() const;
};

/// Runs the filter (and the dead-reckoning baseline) along `test`. When
/// `motions` is given, element t replaces the odometry between frames t-1
/// and t (element 0 is ignored) and VO is not run.
RunReport run_localization(const World& world, const VoxelMap& map, std::span<const Pose> test,
                           const ExperimentConfig& cfg, std::uint64_t seed,
                           const std::vector<Twist>* motions = nullptr);

/// Filter over recorded descriptor frames with known odometry, without
/// ground truth. `motions` holds either one twist per frame (the first is
/// ignored) or one per consecutive pair.
struct SequenceResult {
  std::vector<Pose> estimates;
  std::vector<StepDiagnostics> diagnostics;
};
SequenceResult localize_sequence(const VoxelMap& map, const CameraIntrinsics& k,
                                 std::span<const DescriptorImage> frames, std::span<const Twist> motions,
                                 const ExperimentConfig& cfg, const InitRegion& init, std::uint64_t seed);

/// Prior used for global (re-)initialisation: the free centre of the yard at
/// camera height and pitch, any heading.
PoseBox global_region(const ExperimentConfig& cfg);

/// Frame, N_eff, cluster count and stage times of a sequence run.
void save_sequence_diagnostics_csv(const SequenceResult& result, const std::filesystem::path& path);

/// Builds world, map and trajectories from `cfg` and runs them.
struct ExperimentSetup {
  World world;
  std::vector<Pose> mapping;
  std::vector<Pose> test;
  VoxelMap map;
};
ExperimentSetup prepare_experiment(const ExperimentConfig& cfg);

/// Per-frame CSV: poses, errors, filter diagnostics and stage timings.
void save_diagnostics_csv(const RunReport& report, const std::filesystem::path& path);
/// Reads the timing columns back. ms_predict, ms_weight, ms_resample and
/// ms_cluster are required; missing ms_observe / ms_vo read as 0 and a
/// missing ms_wall as the stage sum.
std::vector<FrameTiming> load_timing_csv(const std::filesystem::path& path);

}  // namespace featloc
