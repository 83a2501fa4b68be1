#include "featloc/vo/visual_odometry.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "featloc/common/error.hpp"

namespace featloc {
namespace {

std::vector<double> parse_numbers(const std::string& line, char separator, std::size_t line_no) {
  std::vector<double> values;
  std::stringstream ss(line);
  std::string cell;
  auto push = [&](const std::string& token) {
    if (token.empty()) return;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      throw ParseError("bad number '" + token + "'", line_no);
    }
    if (used != token.size()) throw ParseError("bad number '" + token + "'", line_no);
    values.push_back(v);
  };
  if (separator == ' ') {
    while (ss >> cell) push(cell);
  } else {
    while (std::getline(ss, cell, separator)) {
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      push(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
  }
  return values;
}

}  // namespace

VoStepResult vo_step(std::span<const Match2D2D> matches, const CameraIntrinsics& k, const VoConfig& cfg,
                     std::optional<double> previous_speed) {
  const EssentialResult est = estimate_essential(matches, k, cfg);
  const double speed = previous_speed.value_or(cfg.expected_speed);
  const double displacement = speed * cfg.dt;

  VoStepResult out;
  out.inliers = est.inliers.size();
  out.low_confidence = est.zero_parallax;
  out.motion.rotational = so3_log(est.motion.rotation);
  out.motion.translational = est.motion.t_unit.normalized() * displacement;
  return out;
}

SpeedModel::SpeedModel(double initial_speed, double alpha, double gate)
    : speed_(initial_speed), alpha_(alpha), gate_(gate) {
  if (!(initial_speed >= 0.0) || !(alpha > 0.0 && alpha <= 1.0) || !(gate >= 1.0)) {
    throw InvalidArgument("bad speed model parameters");
  }
}

bool SpeedModel::update(double measured) {
  if (!std::isfinite(measured) || measured < 0.0) return false;
  if (speed_ > 0.0 && (measured > gate_ * speed_ || measured * gate_ < speed_)) return false;
  speed_ = alpha_ * measured + (1.0 - alpha_) * speed_;
  return true;
}

std::vector<Match2D2D> load_matches_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<Match2D2D> matches;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line.rfind("u1", 0) == 0) continue;
    const auto v = parse_numbers(line, ',', line_no);
    if (v.size() != 4) throw ParseError("expected 4 columns u1,v1,u2,v2", line_no);
    matches.push_back({{v[0], v[1]}, {v[2], v[3]}});
  }
  return matches;
}

void save_matches_csv(std::span<const Match2D2D> matches, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "u1,v1,u2,v2\n";
  for (const auto& m : matches) out << m.p1.x() << ',' << m.p1.y() << ',' << m.p2.x() << ',' << m.p2.y() << '\n';
}

void save_twists(std::span<const Twist> twists, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.precision(17);
  for (const auto& t : twists) {
    const Vector6d v = t.as_vector();
    for (int i = 0; i < 6; ++i) out << (i ? " " : "") << v(i);
    out << '\n';
  }
}

std::vector<Twist> load_twists(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<Twist> twists;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto v = parse_numbers(line, ' ', line_no);
    if (v.size() != 6) throw ParseError("expected 6 numbers per twist", line_no);
    twists.push_back(Twist::from_vector(Eigen::Map<const Vector6d>(v.data())));
  }
  return twists;
}

}  // namespace featloc
