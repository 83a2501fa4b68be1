#include "featloc/harness/pose_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include "featloc/common/error.hpp"

namespace featloc {

std::vector<Pose> parse_kitti_poses(std::istream& in) {
  std::vector<Pose> poses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    double v[12];
    int count = 0;
    const char* p = line.data();
    const char* end = p + line.size();
    while (true) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p == end) break;
      if (count == 12) throw ParseError("more than 12 numbers", line_no);
      const auto [next, ec] = std::from_chars(p, end, v[count]);
      if (ec != std::errc() || !std::isfinite(v[count])) throw ParseError("malformed number", line_no);
      p = next;
      if (p < end && *p != ' ' && *p != '\t' && *p != '\r') throw ParseError("malformed number", line_no);
      ++count;
    }
    if (count != 12) throw ParseError("expected 12 numbers, got " + std::to_string(count), line_no);
    Eigen::Matrix3d r;
    Eigen::Vector3d t;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) r(i, j) = v[4 * i + j];
      t(i) = v[4 * i + 3];
    }
    const Pose camera_to_world(r, t);
    if (!camera_to_world.is_valid_rotation(1e-6)) throw ParseError("rotation block is not orthonormal", line_no);
    poses.push_back(camera_to_world.inverse());
  }
  return poses;
}

std::vector<Pose> load_kitti_poses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_kitti_poses(in);
}

void write_kitti_poses(std::span<const Pose> world_to_camera, std::ostream& out) {
  out << std::setprecision(17);
  for (const auto& pose : world_to_camera) {
    const Pose c2w = pose.inverse();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) out << c2w.rotation(i, j) << ' ';
      out << c2w.translation(i) << (i == 2 ? '\n' : ' ');
    }
  }
}

void save_kitti_poses(std::span<const Pose> world_to_camera, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_kitti_poses(world_to_camera, out);
}

}  // namespace featloc
