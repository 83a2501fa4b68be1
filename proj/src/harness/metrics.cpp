#include "featloc/harness/metrics.hpp"

#include <cmath>

#include "featloc/common/error.hpp"

namespace featloc {

PoseErrors pose_errors(std::span<const Pose> estimates, std::span<const Pose> ground_truth) {
  if (estimates.size() != ground_truth.size()) throw InvalidArgument("pose lists differ in length");
  PoseErrors e;
  e.translation.reserve(estimates.size());
  e.rotation.reserve(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    e.translation.push_back((estimates[i].center() - ground_truth[i].center()).norm());
    e.rotation.push_back(rotation_angle(estimates[i].rotation, ground_truth[i].rotation));
  }
  return e;
}

double rms(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum / static_cast<double>(values.size()));
}

AteResult ate_rmse(std::span<const Pose> estimates, std::span<const Pose> ground_truth) {
  const PoseErrors e = pose_errors(estimates, ground_truth);
  return {rms(e.translation), rms(e.rotation)};
}

}  // namespace featloc
