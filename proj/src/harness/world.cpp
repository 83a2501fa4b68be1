#include "featloc/harness/world.hpp"

#include <algorithm>
#include <cmath>

#include "featloc/common/error.hpp"
#include "featloc/common/random.hpp"

namespace featloc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Slab test; returns the entry distance or +inf.
double hit_box(const AxisBox& box, const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
  double t0 = 0.0;
  double t1 = kInf;
  for (int a = 0; a < 3; ++a) {
    if (d(a) == 0.0) {
      if (o(a) < box.min(a) || o(a) > box.max(a)) return kInf;
      continue;
    }
    double ta = (box.min(a) - o(a)) / d(a);
    double tb = (box.max(a) - o(a)) / d(a);
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return kInf;
  }
  return t0 > 0.0 ? t0 : kInf;
}

bool overlaps(const AxisBox& a, const AxisBox& b, double margin) {
  for (int i = 0; i < 2; ++i) {
    if (a.max(i) + margin <= b.min(i) || b.max(i) + margin <= a.min(i)) return false;
  }
  return true;
}

}  // namespace

void WorldSpec::validate() const {
  if (!(half_x > 0.0) || !(half_y > 0.0) || !(wall_height > 0.0)) {
    throw InvalidArgument("world bounds must be positive");
  }
  if (clear_half_x < 0.0 || clear_half_y < 0.0 || clear_half_x > half_x || clear_half_y > half_y) {
    throw InvalidArgument("clear region must lie inside the world");
  }
  if (box_count < 0 || !(box_min_size > 0.0) || box_max_size < box_min_size || !(box_max_height > 0.0)) {
    throw InvalidArgument("invalid box parameters");
  }
  for (const auto& b : extra_boxes) {
    if ((b.max - b.min).minCoeff() <= 0.0) throw InvalidArgument("degenerate box");
  }
  if (!(nuisance_amplitude >= 0.0)) throw InvalidArgument("nuisance amplitude must be non-negative");
  camera.validate();
}

World::World(const WorldSpec& spec)
    : spec_(spec), field_((spec.validate(), spec.field)) {
  if (spec_.nuisance_amplitude > 0.0) {
    DescriptorFieldParams p = spec_.field;
    p.seed = hash_combine(spec_.field.seed, 0x6e756973ULL);
    p.amplitude = spec_.nuisance_amplitude;
    p.min_wavelength = 4.0 * spec_.field.max_wavelength;
    p.max_wavelength = 8.0 * spec_.field.max_wavelength;
    p.waves_per_channel = 2;
    nuisance_.emplace(p);
  }

  boxes_ = spec_.extra_boxes;
  StreamRng rng(spec_.seed, 0x626f78ULL);
  const AxisBox clear{{-spec_.clear_half_x, -spec_.clear_half_y, 0.0}, {spec_.clear_half_x, spec_.clear_half_y, 0.0}};
  int placed = 0;
  for (int attempt = 0; placed < spec_.box_count && attempt < 1000 * std::max(1, spec_.box_count); ++attempt) {
    const double sx = spec_.box_min_size + (spec_.box_max_size - spec_.box_min_size) * rng.uniform();
    const double sy = spec_.box_min_size + (spec_.box_max_size - spec_.box_min_size) * rng.uniform();
    const double h = spec_.box_min_size + (spec_.box_max_height - spec_.box_min_size) * rng.uniform();
    const double x = -spec_.half_x + sx / 2 + (2 * spec_.half_x - sx) * rng.uniform();
    const double y = -spec_.half_y + sy / 2 + (2 * spec_.half_y - sy) * rng.uniform();
    const double g = spec_.ground_height;
    AxisBox box{{x - sx / 2, y - sy / 2, g}, {x + sx / 2, y + sy / 2, g + h}};
    if (overlaps(box, clear, 0.3)) continue;
    if (std::any_of(boxes_.begin(), boxes_.end(), [&](const AxisBox& b) { return overlaps(box, b, 0.2); })) continue;
    boxes_.push_back(box);
    ++placed;
  }
}

double World::raycast(const Eigen::Vector3d& o, const Eigen::Vector3d& d) const {
  double best = kInf;
  const double g = spec_.ground_height;
  if (spec_.ground && d.z() < 0.0 && o.z() > g) best = (g - o.z()) / d.z();
  if (spec_.walls) {
    const double bounds[2] = {spec_.half_x, spec_.half_y};
    for (int a = 0; a < 2; ++a) {
      if (d(a) == 0.0) continue;
      const double s = ((d(a) > 0.0 ? bounds[a] : -bounds[a]) - o(a)) / d(a);
      if (s <= 0.0 || s >= best) continue;
      const double z = o.z() + s * d.z();
      if (z >= g && z <= g + spec_.wall_height) best = s;
    }
  }
  for (const auto& box : boxes_) best = std::min(best, hit_box(box, o, d));
  return best;
}

bool World::is_free(const Eigen::Vector3d& p, double margin) const {
  if (std::fabs(p.x()) > spec_.half_x - margin || std::fabs(p.y()) > spec_.half_y - margin) return false;
  return std::none_of(boxes_.begin(), boxes_.end(), [&](const AxisBox& b) { return b.contains(p, margin); });
}

DepthImage World::render_depth(const CameraIntrinsics& k, const Pose& world_to_camera) const {
  k.validate();
  DepthImage depth(k.width, k.height, 0.0);
  const Eigen::Matrix3d rt = world_to_camera.rotation.transpose();
  const Eigen::Vector3d origin = world_to_camera.center();
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      // Unit z in the camera frame, so the ray parameter is the z depth.
      const Eigen::Vector3d ray((u + 0.5 - k.cx) / k.fx, (v + 0.5 - k.cy) / k.fy, 1.0);
      const double s = raycast(origin, rt * ray);
      if (std::isfinite(s)) depth(u, v) = s;
    }
  }
  return depth;
}

DescriptorImage World::observe(const CameraIntrinsics& k, const Pose& world_to_camera, const DepthImage& depth,
                               double sigma, std::uint64_t seed, std::uint64_t frame_id) const {
  return synth_descriptor_field(field_, k, world_to_camera, depth, sigma, hash_combine(seed, frame_id), nuisance());
}

}  // namespace featloc
