#pragma once

#include <span>
#include <vector>

#include "featloc/geometry/pose.hpp"

namespace featloc {

struct PoseErrors {
  /// Camera-centre distance (m) and geodesic rotation angle (rad) per frame.
  std::vector<double> translation;
  std::vector<double> rotation;
};

struct AteResult {
  double translation_rmse = 0.0;
  double rotation_rmse = 0.0;
};

/// Throws InvalidArgument when the lists differ in length.
PoseErrors pose_errors(std::span<const Pose> estimates, std::span<const Pose> ground_truth);

AteResult ate_rmse(std::span<const Pose> estimates, std::span<const Pose> ground_truth);

double rms(std::span<const double> values);

}  // namespace featloc
