#include "featloc/mcl/filter.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

#include "featloc/common/random.hpp"

namespace featloc {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

StepResult filter_step(ParticleSet& set, const std::optional<Twist>& motion, const DescriptorImage& observed,
                       const VoxelMap& map, const CameraIntrinsics& k, const FilterConfig& cfg,
                       std::uint64_t seed) {
  StepResult result;
  auto& diag = result.diagnostics;
  const auto begin = Clock::now();

  auto t = Clock::now();
  if (motion) predict(set, *motion, cfg.noise, hash_combine(seed, 1));
  diag.ms_predict = ms_since(t);

  t = Clock::now();
  std::vector<LikelihoodTerm> terms;
  weight(set, observed, map, k, cfg.likelihood, &terms, cfg.max_threads);
  diag.ms_weight = ms_since(t);
  diag.n_eff = effective_sample_size(set);
  diag.particles = set.size();
  diag.best_log_likelihood = -std::numeric_limits<double>::infinity();
  for (const auto& term : terms) diag.best_log_likelihood = std::max(diag.best_log_likelihood, term.log_likelihood);

  t = Clock::now();
  set = resample(set, hash_combine(seed, 2), &diag.resampled);
  diag.ms_resample = ms_since(t);

  t = Clock::now();
  result.clusters = mean_shift(set, cfg.cluster);
  result.estimate = map_estimate(result.clusters);
  diag.n_clusters = result.clusters.size();
  diag.ms_cluster = ms_since(t);

  diag.ms_total = ms_since(begin);
  return result;
}

}  // namespace featloc
