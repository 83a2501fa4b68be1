#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "featloc/descriptor/evaluation.hpp"
#include "featloc/harness/experiment.hpp"

namespace featloc {

struct DescriptorBenchmarkOptions {
  int frame_pairs = 12;
  /// Frames between the two views of a pair.
  int frame_gap = 3;
  int points_per_pair = 150;
  int window_radius = 8;
};

struct DescriptorBenchmarkRow {
  int dim = 0;
  DistanceStats distances;
  /// Pooled over all pairs.
  double dense_rmse_px = 0.0;
  double dense_p50_px = 0.0;
  std::size_t evaluated = 0;
  std::size_t matches = 0;
  std::size_t nonmatches = 0;
};

/// Rebuilds the world of `cfg` with an n-channel field and scores noisy
/// observations of frame pairs along the test trajectory: descriptor
/// distances of matching vs non-matching pixels, and dense nearest-neighbour
/// matching error.
DescriptorBenchmarkRow benchmark_descriptor_dim(const ExperimentConfig& cfg, int dim,
                                                const DescriptorBenchmarkOptions& options, std::uint64_t seed);

void save_descriptor_benchmark_csv(const std::vector<DescriptorBenchmarkRow>& rows,
                                   const std::filesystem::path& path);

}  // namespace featloc
