#include "featloc/featmap/map_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "featloc/common/binary_io.hpp"
#include "featloc/common/error.hpp"

namespace featloc {
namespace {

constexpr char kMagic[8] = {'F', 'E', 'M', 'A', 'P', '1', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_map(const VoxelMap& map, std::ostream& out) {
  if (!map.finalized()) throw std::logic_error("only finalized maps can be saved");
  BinaryWriter w(out);
  w.bytes(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kVersion);
  w.put<double>(map.voxel_size());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(map.descriptor_dim()));
  w.put<std::uint64_t>(map.size());
  for (std::size_t s = 0; s < map.size(); ++s) {
    const auto& key = map.key(s);
    w.put<std::int32_t>(key.x);
    w.put<std::int32_t>(key.y);
    w.put<std::int32_t>(key.z);
    w.put<std::uint32_t>(map.count(s));
    for (float x : map.packed(s)) w.put<float>(x);
  }
}

void save_map(const VoxelMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  save_map(map, out);
}

VoxelMap load_map(std::istream& in) {
  BinaryReader r(in);
  char magic[8];
  r.bytes(magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw FormatError("bad FEMAP1 magic", 0);

  std::uint64_t at = r.offset();
  if (r.get<std::uint32_t>("version") != kVersion) throw FormatError("unsupported FEMAP1 version", at);
  at = r.offset();
  const double voxel_size = r.get<double>("voxel size");
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) throw FormatError("invalid voxel size", at);
  at = r.offset();
  const auto dim = r.get<std::uint32_t>("descriptor dim");
  if (dim == 0 || dim > (1u << 16)) throw FormatError("invalid descriptor dimension", at);
  at = r.offset();
  const auto count = r.get<std::uint64_t>("voxel count");
  if (count > (1ull << 32)) throw FormatError("implausible voxel count", at);

  std::vector<VoxelIndex> keys;
  std::vector<std::uint32_t> counts;
  std::vector<float> descriptors;
  keys.reserve(count);
  counts.reserve(count);
  descriptors.reserve(count * dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    VoxelIndex key;
    const std::uint64_t record = r.offset();
    key.x = r.get<std::int32_t>("voxel index");
    key.y = r.get<std::int32_t>("voxel index");
    key.z = r.get<std::int32_t>("voxel index");
    const auto n = r.get<std::uint32_t>("voxel count");
    if (n == 0) throw FormatError("voxel with zero observations", record);
    keys.push_back(key);
    counts.push_back(n);
    for (std::uint32_t c = 0; c < dim; ++c) {
      const std::uint64_t value_at = r.offset();
      const float x = r.get<float>("descriptor");
      if (!std::isfinite(x)) throw FormatError("non-finite descriptor", value_at);
      descriptors.push_back(x);
    }
  }
  try {
    return VoxelMap::from_voxels(voxel_size, static_cast<int>(dim), std::move(keys), std::move(counts),
                                 descriptors);
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what(), r.offset());
  }
}

VoxelMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return load_map(in);
}

}  // namespace featloc
