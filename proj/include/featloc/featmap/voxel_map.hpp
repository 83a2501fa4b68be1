#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "featloc/common/image.hpp"
#include "featloc/descriptor/descriptor_image.hpp"
#include "featloc/geometry/camera.hpp"

namespace featloc {

struct VoxelIndex {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int32_t z = 0;

  auto operator<=>(const VoxelIndex&) const = default;
};

struct VoxelIndexHash {
  std::size_t operator()(const VoxelIndex& i) const noexcept;
};

/// One posed frame to fuse: descriptors and z-depth share the image size of
/// `k`; `pose` is world->camera.
struct PosedObservation {
  const DescriptorImage& descriptors;
  const DepthImage& depth;
  CameraIntrinsics k;
  Pose pose;
};

/// Sparse voxel grid where each occupied voxel stores the running mean of
/// every descriptor fused into it and the observation count.
///
/// Building is single-writer. finalize() sorts voxels by index, rounds the
/// means to f32 (the persisted precision) and builds the culling index used
/// by the renderer; after that the map is read-only and safe to share
/// between threads.
class VoxelMap {
 public:
  VoxelMap(double voxel_size, int descriptor_dim);

  double voxel_size() const { return voxel_size_; }
  int descriptor_dim() const { return dim_; }
  std::size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }
  bool finalized() const { return finalized_; }

  /// floor(coordinate / voxel_size) per axis.
  VoxelIndex index_of(const Eigen::Vector3d& point) const;
  Eigen::Vector3d center_of(const VoxelIndex& index) const;

  /// Count-weighted running-mean update of one voxel.
  void fuse(const VoxelIndex& index, std::span<const float> descriptor);

  /// Backprojects every pixel with a positive finite depth and fuses its
  /// descriptor into the voxel containing the surface point. Returns the
  /// number of fused pixels.
  std::size_t insert_observation(const PosedObservation& observation);

  void finalize();

  /// Slot of `index`, or -1 when the voxel is empty.
  std::ptrdiff_t find(const VoxelIndex& index) const;

  const VoxelIndex& key(std::size_t slot) const { return keys_[slot]; }
  std::uint32_t count(std::size_t slot) const { return counts_[slot]; }
  std::span<const double> mean(std::size_t slot) const {
    return {means_.data() + slot * dim_, static_cast<std::size_t>(dim_)};
  }

  /// f32 copy of the mean; only available once finalized.
  std::span<const float> packed(std::size_t slot) const {
    return {packed_.data() + slot * dim_, static_cast<std::size_t>(dim_)};
  }
  const Eigen::Vector3d& center(std::size_t slot) const { return centers_[slot]; }

  /// Bounding spheres of voxel blocks, for frustum culling.
  struct Block {
    Eigen::Vector3d center;
    double radius = 0.0;
    std::vector<std::uint32_t> slots;
  };
  const std::vector<Block>& blocks() const { return blocks_; }

  /// Builds a finalized map from already-averaged voxels (used by loaders).
  static VoxelMap from_voxels(double voxel_size, int descriptor_dim, std::vector<VoxelIndex> keys,
                              std::vector<std::uint32_t> counts, std::span<const float> descriptors);

  /// Bitwise equality of size, dimension, keys, counts and f32 descriptors.
  bool identical(const VoxelMap& other) const;

 private:
  void require_building() const;

  double voxel_size_;
  int dim_;
  bool finalized_ = false;

  std::unordered_map<VoxelIndex, std::uint32_t, VoxelIndexHash> slots_;
  std::vector<VoxelIndex> keys_;
  std::vector<std::uint32_t> counts_;
  std::vector<double> means_;

  std::vector<float> packed_;
  std::vector<Eigen::Vector3d> centers_;
  std::vector<Block> blocks_;
};

}  // namespace featloc
