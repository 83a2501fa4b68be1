#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "featloc/common/image.hpp"
#include "featloc/descriptor/descriptor_image.hpp"
#include "featloc/featmap/voxel_map.hpp"

namespace featloc {

/// Per-pixel nearest voxel produced by splatting a map into a camera.
struct ZBuffer {
  static constexpr std::uint32_t kEmpty = std::numeric_limits<std::uint32_t>::max();

  int width = 0;
  int height = 0;
  /// Euclidean camera-to-voxel-centre distance of the winning voxel.
  std::vector<double> distance;
  std::vector<std::uint32_t> slot;

  void reset(int w, int h);
  std::size_t valid_count() const;
};

/// Descriptor view of the map from a candidate pose. Pixels with valid == 0
/// carry no data (zero descriptor, zero depth) and must be ignored.
struct ImaginedView {
  DescriptorImage descriptors;
  DepthImage depth;
  std::vector<std::uint8_t> valid;
  std::size_t valid_count = 0;
};

/// Square splat half-width in pixels for a voxel at camera depth `depth`:
/// max(1, round(f * voxel_size / depth / 2)) with f the mean focal length.
int splat_radius(const CameraIntrinsics& k, double voxel_size, double depth);

/// Splats every voxel whose centre projects inside the image. Each pixel keeps
/// the voxel with the smallest distance to the camera centre; equal
/// distances go to the lexicographically smallest voxel index. The map must
/// be finalized. `out` is reused to avoid reallocation.
void render_zbuffer(const VoxelMap& map, const CameraIntrinsics& k, const Pose& world_to_camera,
                    ZBuffer& out);

ImaginedView render_imagined(const VoxelMap& map, const CameraIntrinsics& k, const Pose& world_to_camera);

}  // namespace featloc
