#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "featloc/descriptor/correspondences.hpp"
#include "featloc/descriptor/descriptor_image.hpp"

namespace featloc {

/// Summary of match vs non-match descriptor distances.
struct DistanceStats {
  double mean_match = 0.0;
  double mean_nonmatch = 0.0;
  /// Histogram-intersection area of the two normalised distance histograms
  /// (100 uniform bins over [0, largest observed distance]).
  double overlap = 0.0;
};

constexpr int kOverlapBins = 100;

DistanceStats distance_stats(std::span<const double> match_distances,
                             std::span<const double> nonmatch_distances);

using DescriptorPair = std::pair<Eigen::VectorXd, Eigen::VectorXd>;
DistanceStats distance_stats(std::span<const DescriptorPair> matches,
                             std::span<const DescriptorPair> nonmatches);

struct DenseMatchStats {
  double rmse_px = 0.0;
  double p50_px = 0.0;
  double p95_px = 0.0;
  std::size_t evaluated = 0;
};

/// For every match pair, takes the descriptor of F1 at the pixel containing
/// p1 and searches F2 for the nearest descriptor over the square of pixels
/// within `window_radius` of the pixel containing p2. Errors are measured in
/// whole pixels between the found and the true pixel; ties keep the first
/// pixel in row-major order. A radius >= max(width, height) is a global
/// search.
DenseMatchStats dense_match_eval(const DescriptorImage& f1, const DescriptorImage& f2,
                                 const CorrespondenceSet& ground_truth, int window_radius);

/// Linear-interpolated percentile, q in [0, 100].
double percentile(std::vector<double> values, double q);

}  // namespace featloc
