#include "featloc/featmap/voxel_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "featloc/common/error.hpp"
#include "featloc/common/random.hpp"

namespace featloc {
namespace {

constexpr int kBlockEdge = 8;

std::int32_t floor_div(std::int32_t a, std::int32_t b) {
  return a >= 0 ? a / b : -((-a + b - 1) / b);
}

}  // namespace

std::size_t VoxelIndexHash::operator()(const VoxelIndex& i) const noexcept {
  const auto pack = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i.x)) << 42) ^
                    (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i.y)) << 21) ^
                    static_cast<std::uint64_t>(static_cast<std::uint32_t>(i.z));
  return static_cast<std::size_t>(mix64(pack));
}

VoxelMap::VoxelMap(double voxel_size, int descriptor_dim) : voxel_size_(voxel_size), dim_(descriptor_dim) {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) throw InvalidArgument("voxel size must be positive");
  if (descriptor_dim <= 0) throw InvalidArgument("descriptor dimension must be positive");
}

VoxelIndex VoxelMap::index_of(const Eigen::Vector3d& p) const {
  auto q = [&](double c) {
    const double f = std::floor(c / voxel_size_);
    if (!(std::abs(f) < static_cast<double>(std::numeric_limits<std::int32_t>::max()))) {
      throw InvalidArgument("point outside the representable voxel range");
    }
    return static_cast<std::int32_t>(f);
  };
  return {q(p.x()), q(p.y()), q(p.z())};
}

Eigen::Vector3d VoxelMap::center_of(const VoxelIndex& i) const {
  return {(i.x + 0.5) * voxel_size_, (i.y + 0.5) * voxel_size_, (i.z + 0.5) * voxel_size_};
}

void VoxelMap::require_building() const {
  if (finalized_) throw std::logic_error("voxel map is finalized and read-only");
}

void VoxelMap::fuse(const VoxelIndex& index, std::span<const float> descriptor) {
  require_building();
  if (descriptor.size() != static_cast<std::size_t>(dim_)) {
    throw InvalidArgument("descriptor dimension does not match the map");
  }
  auto [it, inserted] = slots_.try_emplace(index, static_cast<std::uint32_t>(keys_.size()));
  const std::size_t slot = it->second;
  if (inserted) {
    keys_.push_back(index);
    counts_.push_back(0);
    means_.resize(means_.size() + dim_, 0.0);
  }
  const std::uint32_t k = ++counts_[slot];
  double* m = means_.data() + slot * dim_;
  for (int c = 0; c < dim_; ++c) m[c] += (static_cast<double>(descriptor[c]) - m[c]) / k;
}

std::size_t VoxelMap::insert_observation(const PosedObservation& obs) {
  require_building();
  if (obs.descriptors.dim() != dim_) throw InvalidArgument("descriptor dimension does not match the map");
  if (obs.descriptors.width() != obs.depth.width || obs.descriptors.height() != obs.depth.height) {
    throw InvalidArgument("descriptor and depth images differ in size");
  }
  if (obs.depth.width != obs.k.width || obs.depth.height != obs.k.height) {
    throw InvalidArgument("image size does not match the intrinsics");
  }
  std::size_t fused = 0;
  for (int v = 0; v < obs.depth.height; ++v) {
    for (int u = 0; u < obs.depth.width; ++u) {
      const double d = obs.depth(u, v);
      if (!(d > 0.0) || !std::isfinite(d)) continue;
      const Eigen::Vector3d q = backproject({u + 0.5, v + 0.5}, d, obs.k, obs.pose);
      fuse(index_of(q), obs.descriptors.at(u, v));
      ++fused;
    }
  }
  return fused;
}

std::ptrdiff_t VoxelMap::find(const VoxelIndex& index) const {
  const auto it = slots_.find(index);
  return it == slots_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

void VoxelMap::finalize() {
  if (finalized_) return;
  std::vector<std::uint32_t> order(keys_.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return keys_[a] < keys_[b]; });

  std::vector<VoxelIndex> keys(keys_.size());
  std::vector<std::uint32_t> counts(keys_.size());
  packed_.assign(keys_.size() * dim_, 0.0f);
  for (std::size_t s = 0; s < order.size(); ++s) {
    keys[s] = keys_[order[s]];
    counts[s] = counts_[order[s]];
    for (int c = 0; c < dim_; ++c) packed_[s * dim_ + c] = static_cast<float>(means_[order[s] * dim_ + c]);
  }
  keys_ = std::move(keys);
  counts_ = std::move(counts);
  means_.assign(packed_.begin(), packed_.end());

  slots_.clear();
  slots_.reserve(keys_.size());
  centers_.resize(keys_.size());
  std::map<VoxelIndex, std::size_t> block_of;
  blocks_.clear();
  const double block_size = kBlockEdge * voxel_size_;
  for (std::size_t s = 0; s < keys_.size(); ++s) {
    slots_.emplace(keys_[s], static_cast<std::uint32_t>(s));
    centers_[s] = center_of(keys_[s]);
    const VoxelIndex b{floor_div(keys_[s].x, kBlockEdge), floor_div(keys_[s].y, kBlockEdge),
                       floor_div(keys_[s].z, kBlockEdge)};
    auto [it, inserted] = block_of.try_emplace(b, blocks_.size());
    if (inserted) {
      Block block;
      block.center = Eigen::Vector3d((b.x + 0.5) * block_size, (b.y + 0.5) * block_size,
                                     (b.z + 0.5) * block_size);
      block.radius = 0.5 * std::sqrt(3.0) * block_size;
      blocks_.push_back(std::move(block));
    }
    blocks_[it->second].slots.push_back(static_cast<std::uint32_t>(s));
  }
  finalized_ = true;
}

VoxelMap VoxelMap::from_voxels(double voxel_size, int descriptor_dim, std::vector<VoxelIndex> keys,
                               std::vector<std::uint32_t> counts, std::span<const float> descriptors) {
  if (counts.size() != keys.size() || descriptors.size() != keys.size() * static_cast<std::size_t>(descriptor_dim)) {
    throw InvalidArgument("voxel arrays differ in length");
  }
  VoxelMap map(voxel_size, descriptor_dim);
  map.keys_ = std::move(keys);
  map.counts_ = std::move(counts);
  map.means_.assign(descriptors.begin(), descriptors.end());
  for (std::size_t s = 0; s < map.keys_.size(); ++s) {
    if (map.counts_[s] == 0) throw InvalidArgument("voxel with zero observations");
    if (!map.slots_.try_emplace(map.keys_[s], static_cast<std::uint32_t>(s)).second) {
      throw InvalidArgument("duplicate voxel index");
    }
  }
  map.finalize();
  return map;
}

bool VoxelMap::identical(const VoxelMap& other) const {
  if (!finalized_ || !other.finalized_) throw std::logic_error("identical() needs finalized maps");
  return std::memcmp(&voxel_size_, &other.voxel_size_, sizeof(double)) == 0 && dim_ == other.dim_ &&
         keys_ == other.keys_ && counts_ == other.counts_ && packed_.size() == other.packed_.size() &&
         std::memcmp(packed_.data(), other.packed_.data(), packed_.size() * sizeof(float)) == 0;
}

}  // namespace featloc
