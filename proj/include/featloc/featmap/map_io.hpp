#pragma once

#include <filesystem>
#include <iosfwd>

#include "featloc/featmap/voxel_map.hpp"

namespace featloc {

/// FEMAP1, little-endian:
///   "FEMAP1\0\0", u32 version = 1, f64 voxel_size, u32 descriptor_dim n,
///   u64 voxel_count, then per voxel i32 ix, i32 iy, i32 iz, u32 count,
///   n x f32 descriptor.
/// Saving finalizes nothing; the map must already be finalized.
void save_map(const VoxelMap& map, std::ostream& out);
void save_map(const VoxelMap& map, const std::filesystem::path& path);

/// Throws FormatError (with byte offset) on bad magic, version or truncation.
VoxelMap load_map(std::istream& in);
VoxelMap load_map(const std::filesystem::path& path);

}  // namespace featloc
