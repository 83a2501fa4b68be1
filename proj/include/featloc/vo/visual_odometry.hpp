#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "featloc/geometry/pose.hpp"
#include "featloc/vo/essential.hpp"

namespace featloc {

struct VoStepResult {
  /// Pose of camera t in camera t-1 (see Twist), metric via the speed model.
  Twist motion;
  /// Set when the matches carry no translational information; the
  /// translation then points along the optical axis at the modelled speed.
  bool low_confidence = false;
  std::size_t inliers = 0;
};

/// One monocular VO step: essential matrix, cheirality, and a translation
/// scaled to previous_speed * dt (cfg.expected_speed * dt when no previous
/// speed is known). Errors from estimate_essential propagate.
VoStepResult vo_step(std::span<const Match2D2D> matches, const CameraIntrinsics& k, const VoConfig& cfg,
                     std::optional<double> previous_speed = std::nullopt);

/// Constant-velocity speed state, updated as an exponential moving average
/// of accepted displacements.
class SpeedModel {
 public:
  explicit SpeedModel(double initial_speed, double alpha = 0.5, double gate = 2.0);

  double speed() const { return speed_; }

  /// Folds in a measured speed if it lies within a factor `gate` of the
  /// current estimate. Returns whether it was accepted.
  bool update(double measured_speed);

 private:
  double speed_;
  double alpha_;
  double gate_;
};

/// "u1,v1,u2,v2" rows; an optional header line is skipped.
std::vector<Match2D2D> load_matches_csv(const std::filesystem::path& path);
void save_matches_csv(std::span<const Match2D2D> matches, const std::filesystem::path& path);

/// One twist per line: tx ty tz rx ry rz.
void save_twists(std::span<const Twist> twists, const std::filesystem::path& path);
std::vector<Twist> load_twists(const std::filesystem::path& path);

}  // namespace featloc
