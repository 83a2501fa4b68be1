#include "featloc/descriptor/contrastive_loss.hpp"

#include <algorithm>
#include <cmath>

#include "featloc/common/error.hpp"

namespace featloc {
namespace {

double from_distance(PairLabel label, double d, const LossConfig& config) {
  switch (label) {
    case PairLabel::kMatch:
      return 0.5 * d * d;
    case PairLabel::kNonMatch: {
      const double gap = std::max(0.0, config.margin - d);
      return 0.5 * gap * gap;
    }
    case PairLabel::kIgnore:
      break;
  }
  return 0.0;
}

/// Sequential sum of squared differences, shared by both overloads so float
/// and double inputs follow the same arithmetic.
template <typename A, typename B>
double squared_distance(const A& f1, const B& f2, std::size_t n) {
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = static_cast<double>(f1[i]) - static_cast<double>(f2[i]);
    sq += diff * diff;
  }
  return sq;
}

void check_margin(const LossConfig& config) {
  if (!(config.margin > 0.0)) throw InvalidArgument("contrastive margin must be positive");
}

}  // namespace

double contrastive_loss(PairLabel label, std::span<const float> f1, std::span<const float> f2,
                        const LossConfig& config) {
  check_margin(config);
  if (f1.size() != f2.size()) throw InvalidArgument("descriptor dimension mismatch");
  return from_distance(label, std::sqrt(squared_distance(f1, f2, f1.size())), config);
}

double contrastive_loss(PairLabel label, const Eigen::VectorXd& f1, const Eigen::VectorXd& f2,
                        const LossConfig& config) {
  check_margin(config);
  if (f1.size() != f2.size()) throw InvalidArgument("descriptor dimension mismatch");
  return from_distance(label, std::sqrt(squared_distance(f1, f2, static_cast<std::size_t>(f1.size()))), config);
}

double total_loss(const CorrespondenceSet& pairs, const DescriptorImage& f1,
                  const DescriptorImage& f2, const LossConfig& config) {
  if (f1.dim() != f2.dim()) throw InvalidArgument("descriptor dimension mismatch");
  double sum = 0.0;
  for (const auto& pair : pairs) {
    if (pair.label == PairLabel::kIgnore) continue;
    sum += contrastive_loss(pair.label, f1.sample(pair.p1.x(), pair.p1.y()),
                            f2.sample(pair.p2.x(), pair.p2.y()), config);
  }
  return sum;
}

}  // namespace featloc
