#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "featloc/mcl/likelihood.hpp"
#include "featloc/mcl/mean_shift.hpp"
#include "featloc/mcl/particles.hpp"

namespace featloc {

struct FilterConfig {
  LikelihoodConfig likelihood;
  MotionNoise noise;
  ClusterConfig cluster;
  unsigned max_threads = 0;
};

struct StepDiagnostics {
  /// Effective sample size after weighting, before resampling.
  double n_eff = 0.0;
  std::size_t particles = 0;
  bool resampled = false;
  std::size_t n_clusters = 0;
  /// Largest single-particle log likelihood of this frame.
  double best_log_likelihood = 0.0;
  double ms_predict = 0.0;
  double ms_weight = 0.0;
  double ms_cluster = 0.0;
  double ms_resample = 0.0;
  double ms_total = 0.0;
};

struct StepResult {
  Pose estimate;
  std::vector<Cluster> clusters;
  StepDiagnostics diagnostics;
};

/// One filter iteration: predict with `motion` (skipped when empty), weight
/// against `observed`, resample when the effective sample size has dropped
/// to N / 2, then cluster the set and return the heaviest mode.
/// All randomness derives from `seed`.
StepResult filter_step(ParticleSet& set, const std::optional<Twist>& motion, const DescriptorImage& observed,
                       const VoxelMap& map, const CameraIntrinsics& k, const FilterConfig& cfg,
                       std::uint64_t seed);

}  // namespace featloc
