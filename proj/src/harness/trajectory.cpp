#include "featloc/harness/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "featloc/common/error.hpp"

namespace featloc {
namespace {

/// Arc-length table for the figure-eight over one period.
class EightCurve {
 public:
  explicit EightCurve(double a) : a_(a) {
    constexpr int kSteps = 20000;
    s_.resize(kSteps + 1);
    len_.resize(kSteps + 1);
    Eigen::Vector2d prev = point(0.0);
    for (int i = 0; i <= kSteps; ++i) {
      s_[i] = 2.0 * std::numbers::pi * i / kSteps;
      const Eigen::Vector2d p = point(s_[i]);
      len_[i] = i == 0 ? 0.0 : len_[i - 1] + (p - prev).norm();
      prev = p;
    }
  }

  double period_length() const { return len_.back(); }

  Eigen::Vector2d point(double s) const { return {a_ * std::sin(s), 0.5 * a_ * std::sin(2.0 * s)}; }
  Eigen::Vector2d tangent(double s) const { return {a_ * std::cos(s), a_ * std::cos(2.0 * s)}; }

  /// Curve parameter at arc length `l` (any real).
  double parameter_at(double l) const {
    const double period = period_length();
    const double laps = std::floor(l / period);
    const double r = l - laps * period;
    const auto it = std::upper_bound(len_.begin(), len_.end(), r);
    const std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - len_.begin()), 1, len_.size() - 1);
    const double f = (r - len_[i - 1]) / std::max(len_[i] - len_[i - 1], 1e-300);
    return laps * 2.0 * std::numbers::pi + s_[i - 1] + f * (s_[i] - s_[i - 1]);
  }

 private:
  double a_;
  std::vector<double> s_;
  std::vector<double> len_;
};

}  // namespace

TrajectoryKind parse_trajectory_kind(const std::string& name) {
  if (name == "straight") return TrajectoryKind::kStraight;
  if (name == "arc") return TrajectoryKind::kArc;
  if (name == "figure-eight" || name == "eight") return TrajectoryKind::kFigureEight;
  throw InvalidArgument("unknown trajectory kind '" + name + "'");
}

std::string to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::kStraight: return "straight";
    case TrajectoryKind::kArc: return "arc";
    case TrajectoryKind::kFigureEight: return "figure-eight";
  }
  return "?";
}

std::vector<Pose> synth_trajectory(const World& world, const TrajectorySpec& spec) {
  if (spec.frames < 1 || !(spec.speed >= 0.0) || !(spec.dt > 0.0)) {
    throw InvalidArgument("trajectory needs frames >= 1, speed >= 0 and dt > 0");
  }
  if (spec.kind != TrajectoryKind::kStraight && !(spec.scale > 0.0)) {
    throw InvalidArgument("trajectory scale must be positive");
  }
  std::optional<EightCurve> eight;
  if (spec.kind == TrajectoryKind::kFigureEight) eight.emplace(spec.scale);

  std::vector<Pose> poses;
  poses.reserve(spec.frames);
  for (int i = 0; i < spec.frames; ++i) {
    const double l = spec.start_offset + spec.speed * spec.dt * i;
    Eigen::Vector2d xy;
    double yaw = 0.0;
    switch (spec.kind) {
      case TrajectoryKind::kStraight: {
        const Eigen::Vector2d dir(std::cos(spec.heading), std::sin(spec.heading));
        xy = spec.center + l * dir;
        yaw = spec.heading;
        break;
      }
      case TrajectoryKind::kArc: {
        const double angle = spec.heading + l / spec.scale;
        xy = spec.center + spec.scale * Eigen::Vector2d(std::cos(angle), std::sin(angle));
        yaw = angle + std::numbers::pi / 2;
        break;
      }
      case TrajectoryKind::kFigureEight: {
        const double s = eight->parameter_at(l);
        xy = spec.center + eight->point(s);
        const Eigen::Vector2d t = eight->tangent(s);
        yaw = std::atan2(t.y(), t.x());
        break;
      }
    }
    const Eigen::Vector3d position(xy.x(), xy.y(), world.spec().ground_height + spec.height);
    if (!world.is_free(position, 0.1)) {
      throw InvalidArgument("trajectory leaves free space at frame " + std::to_string(i));
    }
    poses.push_back(camera_pose_from_heading(position, yaw, spec.pitch));
  }
  return poses;
}

std::vector<Twist> relative_motions(const std::vector<Pose>& poses) {
  std::vector<Twist> out(poses.size());
  for (std::size_t t = 1; t < poses.size(); ++t) {
    // exp(m) maps camera t into camera t-1: P_{t-1} * P_t^-1.
    const Pose rel = poses[t - 1] * poses[t].inverse();
    out[t] = log_map(rel);
  }
  return out;
}

}  // namespace featloc
