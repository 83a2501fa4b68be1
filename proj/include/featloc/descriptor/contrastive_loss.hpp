#pragma once

#include <span>

#include "featloc/descriptor/correspondences.hpp"
#include "featloc/descriptor/descriptor_image.hpp"

namespace featloc {

struct LossConfig {
  double margin = 0.5;
};

/// Pixel-wise contrastive loss for one pair with d = ||f1 - f2||:
///   match     0.5 d^2
///   non-match 0.5 max(0, m - d)^2
///   ignore    0
double contrastive_loss(PairLabel label, std::span<const float> f1, std::span<const float> f2,
                        const LossConfig& config = {});
double contrastive_loss(PairLabel label, const Eigen::VectorXd& f1, const Eigen::VectorXd& f2,
                        const LossConfig& config = {});

/// Sum of contrastive_loss over every labelled pair, reading both images
/// bilinearly. Ignore pairs contribute nothing and are not sampled.
double total_loss(const CorrespondenceSet& pairs, const DescriptorImage& f1,
                  const DescriptorImage& f2, const LossConfig& config = {});

}  // namespace featloc
