#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "featloc/common/image.hpp"
#include "featloc/geometry/camera.hpp"

namespace featloc {

enum class PairLabel : std::int8_t { kNonMatch = 0, kMatch = 1, kIgnore = -1 };

struct CorrespondencePair {
  Eigen::Vector2d p1 = Eigen::Vector2d::Zero();
  Eigen::Vector2d p2 = Eigen::Vector2d::Zero();
  PairLabel label = PairLabel::kIgnore;
};

using CorrespondenceSet = std::vector<CorrespondencePair>;

/// Camera plus its depth map, used to reject occluded projections.
struct DepthView {
  CameraIntrinsics k;
  Pose pose;
  const DepthImage* depth = nullptr;
};

struct CorrespondenceOptions {
  int negatives_per_match = 10;
  /// Negatives closer than this to the true correspondence are redrawn.
  double exclusion_radius_px = 8.0;
  /// A projection is visible when |z - D(p)| <= abs + rel * z.
  double depth_tolerance_abs = 0.02;
  double depth_tolerance_rel = 0.01;
  std::uint64_t seed = 0;
};

/// Co-projects each world point into both views. A point visible (in frame
/// and unoccluded) in both becomes a match, followed by its negatives drawn
/// uniformly over image 2; otherwise it is emitted as an ignore pair whose
/// coordinates are NaN where no projection exists.
CorrespondenceSet generate_correspondences(std::span<const Eigen::Vector3d> world_points,
                                           const DepthView& view1, const DepthView& view2,
                                           const CorrespondenceOptions& options = {});

/// CSV with header "u1,v1,u2,v2,label"; label is 1, 0 or -1 (ignore).
void save_correspondences_csv(const CorrespondenceSet& pairs, const std::filesystem::path& path);
CorrespondenceSet load_correspondences_csv(const std::filesystem::path& path);

}  // namespace featloc
