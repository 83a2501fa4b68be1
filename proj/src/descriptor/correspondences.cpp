#include "featloc/descriptor/correspondences.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "featloc/common/error.hpp"
#include "featloc/common/random.hpp"

namespace featloc {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kMaxNegativeAttempts = 100;

struct Visibility {
  std::optional<Pixel> pixel;
  bool visible = false;
};

Visibility check(const Eigen::Vector3d& q, const DepthView& view, const CorrespondenceOptions& opt) {
  Visibility out;
  out.pixel = project(q, view.k, view.pose);
  if (!out.pixel) return out;
  if (view.depth == nullptr) {
    out.visible = true;
    return out;
  }
  const double d = (*view.depth)(static_cast<int>(out.pixel->u), static_cast<int>(out.pixel->v));
  if (!(d > 0.0) || !std::isfinite(d)) return out;
  const double z = out.pixel->depth;
  out.visible = std::abs(z - d) <= opt.depth_tolerance_abs + opt.depth_tolerance_rel * z;
  return out;
}

Eigen::Vector2d or_nan(const std::optional<Pixel>& p) {
  return p ? p->uv() : Eigen::Vector2d(kNaN, kNaN);
}

}  // namespace

CorrespondenceSet generate_correspondences(std::span<const Eigen::Vector3d> world_points,
                                           const DepthView& view1, const DepthView& view2,
                                           const CorrespondenceOptions& options) {
  CorrespondenceSet out;
  StreamRng rng(options.seed, 0x6e6567ULL);
  const double r2 = options.exclusion_radius_px * options.exclusion_radius_px;

  for (const auto& q : world_points) {
    const Visibility a = check(q, view1, options);
    const Visibility b = check(q, view2, options);
    if (!a.visible || !b.visible) {
      out.push_back({or_nan(a.pixel), or_nan(b.pixel), PairLabel::kIgnore});
      continue;
    }
    const Eigen::Vector2d p1 = a.pixel->uv();
    const Eigen::Vector2d p2 = b.pixel->uv();
    out.push_back({p1, p2, PairLabel::kMatch});

    for (int n = 0; n < options.negatives_per_match; ++n) {
      for (int attempt = 0; attempt < kMaxNegativeAttempts; ++attempt) {
        const Eigen::Vector2d candidate(rng.uniform() * view2.k.width, rng.uniform() * view2.k.height);
        if ((candidate - p2).squaredNorm() > r2) {
          out.push_back({p1, candidate, PairLabel::kNonMatch});
          break;
        }
      }
    }
  }
  return out;
}

void save_correspondences_csv(const CorrespondenceSet& pairs, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "u1,v1,u2,v2,label\n";
  for (const auto& p : pairs) {
    out << p.p1.x() << ',' << p.p1.y() << ',' << p.p2.x() << ',' << p.p2.y() << ','
        << static_cast<int>(p.label) << '\n';
  }
}

CorrespondenceSet load_correspondences_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  CorrespondenceSet pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.rfind("u1", 0) == 0) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("bad number '" + cell + "'", line_no);
      }
    }
    if (values.size() != 5) throw ParseError("expected 5 columns", line_no);
    const int label = static_cast<int>(values[4]);
    if (label < -1 || label > 1 || label != values[4]) throw ParseError("bad label", line_no);
    pairs.push_back({{values[0], values[1]}, {values[2], values[3]}, static_cast<PairLabel>(label)});
  }
  return pairs;
}

}  // namespace featloc
