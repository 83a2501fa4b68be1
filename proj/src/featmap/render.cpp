#include "featloc/featmap/render.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace featloc {

void ZBuffer::reset(int w, int h) {
  width = w;
  height = h;
  distance.assign(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity());
  slot.assign(static_cast<std::size_t>(w) * h, kEmpty);
}

std::size_t ZBuffer::valid_count() const {
  return static_cast<std::size_t>(std::count_if(slot.begin(), slot.end(), [](auto s) { return s != kEmpty; }));
}

int splat_radius(const CameraIntrinsics& k, double voxel_size, double depth) {
  const double f = 0.5 * (k.fx + k.fy);
  const double r = std::round(f * voxel_size / depth / 2.0);
  if (!(r < 1e6)) return 1 << 20;
  return std::max(1, static_cast<int>(r));
}

void render_zbuffer(const VoxelMap& map, const CameraIntrinsics& k, const Pose& world_to_camera,
                    ZBuffer& out) {
  if (!map.finalized()) throw std::logic_error("render needs a finalized map");
  out.reset(k.width, k.height);

  // Inward normals of the four side planes of the viewing frustum.
  const Eigen::Vector3d planes[4] = {
      Eigen::Vector3d(k.fx, 0.0, k.cx).normalized(),
      Eigen::Vector3d(-k.fx, 0.0, k.width - k.cx).normalized(),
      Eigen::Vector3d(0.0, k.fy, k.cy).normalized(),
      Eigen::Vector3d(0.0, -k.fy, k.height - k.cy).normalized(),
  };
  const Eigen::Matrix3d& r = world_to_camera.rotation;
  const Eigen::Vector3d& t = world_to_camera.translation;
  const Eigen::Vector3d eye = world_to_camera.center();
  const int w = k.width;
  const int h = k.height;

  for (const auto& block : map.blocks()) {
    const Eigen::Vector3d bc = r * block.center + t;
    if (bc.z() < -block.radius) continue;
    bool outside = false;
    for (const auto& n : planes) {
      if (n.dot(bc) < -block.radius) {
        outside = true;
        break;
      }
    }
    if (outside) continue;

    for (const std::uint32_t s : block.slots) {
      const Eigen::Vector3d c = r * map.center(s) + t;
      if (!(c.z() > 0.0)) continue;
      const double u = k.fx * c.x() / c.z() + k.cx;
      const double v = k.fy * c.y() / c.z() + k.cy;
      if (!(u >= 0.0 && v >= 0.0 && u < w && v < h)) continue;
      // Measured in world coordinates so that voxels placed symmetrically
      // about the camera tie exactly and the index rule decides.
      const double dist = (map.center(s) - eye).norm();
      const int radius = splat_radius(k, map.voxel_size(), c.z());
      const int ui = static_cast<int>(u);
      const int vi = static_cast<int>(v);
      const int u0 = std::max(0, ui - radius), u1 = std::min(w - 1, ui + radius);
      const int v0 = std::max(0, vi - radius), v1 = std::min(h - 1, vi + radius);
      for (int y = v0; y <= v1; ++y) {
        double* drow = out.distance.data() + static_cast<std::size_t>(y) * w;
        std::uint32_t* srow = out.slot.data() + static_cast<std::size_t>(y) * w;
        for (int x = u0; x <= u1; ++x) {
          // Slots are ordered by voxel index, so the slot breaks ties.
          if (dist < drow[x] || (dist == drow[x] && s < srow[x])) {
            drow[x] = dist;
            srow[x] = s;
          }
        }
      }
    }
  }
}

ImaginedView render_imagined(const VoxelMap& map, const CameraIntrinsics& k, const Pose& world_to_camera) {
  ZBuffer z;
  render_zbuffer(map, k, world_to_camera, z);
  ImaginedView view;
  view.descriptors = DescriptorImage(k.width, k.height, map.descriptor_dim());
  view.depth = DepthImage(k.width, k.height, 0.0);
  view.valid.assign(z.slot.size(), 0);
  for (std::size_t p = 0; p < z.slot.size(); ++p) {
    if (z.slot[p] == ZBuffer::kEmpty) continue;
    const auto src = map.packed(z.slot[p]);
    std::copy(src.begin(), src.end(), view.descriptors.pixel(p).begin());
    view.depth.data[p] = z.distance[p];
    view.valid[p] = 1;
    ++view.valid_count;
  }
  return view;
}

}  // namespace featloc
