#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "featloc/geometry/pose.hpp"
#include "featloc/harness/world.hpp"

namespace featloc {

enum class TrajectoryKind { kStraight, kArc, kFigureEight };

TrajectoryKind parse_trajectory_kind(const std::string& name);
std::string to_string(TrajectoryKind kind);

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::kFigureEight;
  double speed = 1.5;  // m/s
  double dt = 0.1;     // s
  int frames = 200;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  /// Arc radius, or half-width of the figure-eight (its half-height is
  /// half of this). Unused for straight lines.
  double scale = 3.0;
  /// Straight: travel direction. Arc: polar angle of the first position.
  double heading = 0.0;
  /// Distance along the path (m) at which the first frame is placed.
  double start_offset = 0.0;
  /// Camera height above the ground plane.
  double height = 1.0;
  double pitch = 0.15;  // rad, positive looks down
};

/// Constant-speed, forward-facing camera poses along the curve. Arcs run
/// counter-clockwise; the figure-eight is x = a sin s, y = a/2 sin 2s,
/// re-parameterised by arc length. Throws InvalidArgument when a pose leaves
/// free space.
std::vector<Pose> synth_trajectory(const World& world, const TrajectorySpec& spec);

/// Frame-to-frame motions: element t (t >= 1) is the pose of camera t in
/// camera t - 1, so poses[t] = exp_map(m[t])^-1 * poses[t-1]. Element 0 is
/// the zero twist.
std::vector<Twist> relative_motions(const std::vector<Pose>& poses);

}  // namespace featloc
