#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "featloc/geometry/pose.hpp"

namespace featloc {

/// KITTI odometry pose files: one row-major 3x4 camera->world matrix
/// [R | t] per line. Poses are returned world->camera. Blank lines are
/// skipped; a malformed line throws ParseError carrying its 1-based number.
std::vector<Pose> parse_kitti_poses(std::istream& in);
std::vector<Pose> load_kitti_poses(const std::filesystem::path& path);

/// Writes with 17 significant digits so reads round-trip.
void write_kitti_poses(std::span<const Pose> world_to_camera, std::ostream& out);
void save_kitti_poses(std::span<const Pose> world_to_camera, const std::filesystem::path& path);

}  // namespace featloc
