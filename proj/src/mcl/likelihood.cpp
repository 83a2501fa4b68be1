#include "featloc/mcl/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "featloc/common/error.hpp"
#include "featloc/common/parallel.hpp"

namespace featloc {

double imagined_l1(const ZBuffer& zbuffer, const VoxelMap& map, const DescriptorImage& observed,
                   std::size_t& valid) {
  if (observed.width() != zbuffer.width || observed.height() != zbuffer.height) {
    throw InvalidArgument("observed descriptor image does not match the camera");
  }
  if (observed.dim() != map.descriptor_dim()) throw InvalidArgument("descriptor dimension mismatch");
  const std::size_t dim = static_cast<std::size_t>(map.descriptor_dim());
  double total = 0.0;
  valid = 0;
  for (std::size_t i = 0; i < zbuffer.slot.size(); ++i) {
    const std::uint32_t s = zbuffer.slot[i];
    if (s == ZBuffer::kEmpty) continue;
    const float* a = observed.pixel(i).data();
    const float* b = map.packed(s).data();
    float acc = 0.0f;
    for (std::size_t c = 0; c < dim; ++c) acc += std::fabs(a[c] - b[c]);
    total += acc;
    ++valid;
  }
  return total;
}

LikelihoodTerm likelihood_from_l1(double l1, std::size_t valid, std::size_t pixels, int dim,
                                  const LikelihoodConfig& cfg) {
  LikelihoodTerm term;
  term.l1 = l1;
  term.valid = valid;
  const double fraction = pixels == 0 ? 0.0 : static_cast<double>(valid) / static_cast<double>(pixels);
  if (valid == 0 || fraction < cfg.min_valid_fraction) {
    term.floored = true;
    term.log_likelihood = std::log(cfg.floor_likelihood);
    return term;
  }
  term.log_likelihood = -cfg.sigma_scale * l1 / (static_cast<double>(dim) * static_cast<double>(valid));
  return term;
}

LikelihoodTerm evaluate_likelihood(const VoxelMap& map, const CameraIntrinsics& k, const Pose& pose,
                                   const DescriptorImage& observed, const LikelihoodConfig& cfg) {
  ZBuffer zb;
  render_zbuffer(map, k, pose, zb);
  std::size_t valid = 0;
  const double l1 = imagined_l1(zb, map, observed, valid);
  return likelihood_from_l1(l1, valid, zb.slot.size(), map.descriptor_dim(), cfg);
}

void weight(ParticleSet& set, const DescriptorImage& observed, const VoxelMap& map, const CameraIntrinsics& k,
            const LikelihoodConfig& cfg, std::vector<LikelihoodTerm>* terms, unsigned max_threads) {
  if (!(cfg.sigma_scale > 0.0) || !(cfg.floor_likelihood > 0.0)) throw InvalidArgument("likelihood parameters must be positive");
  const std::size_t n = set.size();
  std::vector<LikelihoodTerm> local(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        if (!(set.particles[i].weight > 0.0)) return;
        thread_local ZBuffer zb;
        render_zbuffer(map, k, set.particles[i].pose, zb);
        std::size_t valid = 0;
        const double l1 = imagined_l1(zb, map, observed, valid);
        local[i] = likelihood_from_l1(l1, valid, zb.slot.size(), map.descriptor_dim(), cfg);
      },
      max_threads);

  std::vector<double> logw(n, -std::numeric_limits<double>::infinity());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double w = set.particles[i].weight;
    if (w > 0.0) logw[i] = std::log(w) + local[i].log_likelihood;
    best = std::max(best, logw[i]);
  }
  if (!std::isfinite(best)) throw DegenerateWeights("no particle has a positive weight");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::exp(logw[i] - best);
    set.particles[i].weight = w;
    sum += w;
  }
  for (auto& p : set.particles) p.weight /= sum;
  if (terms != nullptr) *terms = std::move(local);
}

}  // namespace featloc
