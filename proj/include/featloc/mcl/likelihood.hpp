#pragma once

#include <cstddef>
#include <vector>

#include "featloc/descriptor/descriptor_image.hpp"
#include "featloc/featmap/render.hpp"
#include "featloc/featmap/voxel_map.hpp"
#include "featloc/mcl/particles.hpp"

namespace featloc {

/// Per-particle observation model. With L the summed L1 distance between
/// the observed and imagined descriptors over the V pixels the map covers,
/// the likelihood is exp(-L / sigma) with sigma = 1 / (sigma_scale * n * V),
/// i.e. exp(-sigma_scale * mean per-channel absolute difference).
/// Views covering less than `min_valid_fraction` of the image get `floor_likelihood`.
struct LikelihoodConfig {
  double sigma_scale = 1.0;
  double min_valid_fraction = 0.01;
  double floor_likelihood = 1e-9;
};

struct LikelihoodTerm {
  double log_likelihood = 0.0;
  double l1 = 0.0;
  std::size_t valid = 0;
  bool floored = false;
};

/// Summed L1 distance between `observed` and the voxels held in `zbuffer`.
/// Only valid pixels contribute; `valid` receives their number.
double imagined_l1(const ZBuffer& zbuffer, const VoxelMap& map, const DescriptorImage& observed,
                   std::size_t& valid);

LikelihoodTerm likelihood_from_l1(double l1, std::size_t valid, std::size_t pixels, int dim,
                                  const LikelihoodConfig& cfg);

LikelihoodTerm evaluate_likelihood(const VoxelMap& map, const CameraIntrinsics& k, const Pose& pose,
                                   const DescriptorImage& observed, const LikelihoodConfig& cfg);

/// Multiplies every weight by its particle's likelihood and renormalises.
/// The products are formed in the log domain, so likelihoods far below the
/// double range still rank correctly. Particles are rendered in parallel.
/// Throws DegenerateWeights when no particle keeps a positive weight.
void weight(ParticleSet& set, const DescriptorImage& observed, const VoxelMap& map, const CameraIntrinsics& k,
            const LikelihoodConfig& cfg, std::vector<LikelihoodTerm>* terms = nullptr,
            unsigned max_threads = 0);

}  // namespace featloc
