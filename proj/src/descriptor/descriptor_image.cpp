#include "featloc/descriptor/descriptor_image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "featloc/common/binary_io.hpp"
#include "featloc/common/error.hpp"

namespace featloc {
namespace {

constexpr char kMagic[8] = {'F', 'D', 'E', 'S', 'C', '1', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

DescriptorImage::DescriptorImage(int width, int height, int dim, float fill)
    : width_(width), height_(height), dim_(dim) {
  if (width < 0 || height < 0 || dim <= 0) throw InvalidArgument("bad descriptor image shape");
  values_.assign(static_cast<std::size_t>(width) * height * dim, fill);
}

Eigen::VectorXd DescriptorImage::sample(double u, double v) const {
  if (!(u >= 0.0 && v >= 0.0 && u < width_ && v < height_)) {
    throw InvalidArgument("descriptor sample outside the image");
  }
  // Shift to pixel-centre lattice and clamp to the outermost centres.
  const double x = std::clamp(u - 0.5, 0.0, static_cast<double>(width_ - 1));
  const double y = std::clamp(v - 0.5, 0.0, static_cast<double>(height_ - 1));
  const int x0 = std::min(static_cast<int>(x), width_ - 1);
  const int y0 = std::min(static_cast<int>(y), height_ - 1);
  const int x1 = std::min(x0 + 1, width_ - 1);
  const int y1 = std::min(y0 + 1, height_ - 1);
  const double ax = x - x0;
  const double ay = y - y0;

  Eigen::VectorXd out(dim_);
  const auto f00 = at(x0, y0), f10 = at(x1, y0), f01 = at(x0, y1), f11 = at(x1, y1);
  for (int c = 0; c < dim_; ++c) {
    const double top = (1.0 - ax) * f00[c] + ax * f10[c];
    const double bottom = (1.0 - ax) * f01[c] + ax * f11[c];
    out(c) = (1.0 - ay) * top + ay * bottom;
  }
  return out;
}

bool DescriptorImage::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](float x) { return std::isfinite(x); });
}

void save_fdesc(const DescriptorImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  BinaryWriter w(out);
  w.bytes(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(image.width()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(image.height()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(image.dim()));
  for (int c = 0; c < image.dim(); ++c) {
    for (std::size_t p = 0; p < image.pixel_count(); ++p) w.put<float>(image.pixel(p)[c]);
  }
}

DescriptorImage load_fdesc(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  BinaryReader r(in);
  char magic[8];
  r.bytes(magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw FormatError("bad FDESC1 magic", 0);
  const std::uint64_t version_offset = r.offset();
  if (r.get<std::uint32_t>("version") != kVersion) {
    throw FormatError("unsupported FDESC1 version", version_offset);
  }
  const auto width = r.get<std::uint32_t>("width");
  const auto height = r.get<std::uint32_t>("height");
  const std::uint64_t dim_offset = r.offset();
  const auto dim = r.get<std::uint32_t>("dim");
  if (dim == 0 || width > (1u << 20) || height > (1u << 20) || dim > (1u << 16)) {
    throw FormatError("implausible FDESC1 header", dim_offset);
  }
  DescriptorImage image(static_cast<int>(width), static_cast<int>(height), static_cast<int>(dim));
  for (std::uint32_t c = 0; c < dim; ++c) {
    for (std::size_t p = 0; p < image.pixel_count(); ++p) image.pixel(p)[c] = r.get<float>("channel data");
  }
  return image;
}

void write_descriptor_ppm(const DescriptorImage& image, std::span<const std::uint8_t> mask,
                          const std::filesystem::path& path) {
  const std::size_t n = image.pixel_count();
  if (!mask.empty() && mask.size() != n) throw InvalidArgument("mask size mismatch");
  auto valid = [&](std::size_t p) { return mask.empty() || mask[p] != 0; };

  std::array<int, 3> channel{};
  for (int c = 0; c < 3; ++c) channel[c] = std::min(c, image.dim() - 1);
  std::array<float, 3> lo, hi;
  lo.fill(std::numeric_limits<float>::max());
  hi.fill(std::numeric_limits<float>::lowest());
  for (std::size_t p = 0; p < n; ++p) {
    if (!valid(p)) continue;
    for (int c = 0; c < 3; ++c) {
      lo[c] = std::min(lo[c], image.pixel(p)[channel[c]]);
      hi[c] = std::max(hi[c], image.pixel(p)[channel[c]]);
    }
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  for (std::size_t p = 0; p < n; ++p) {
    unsigned char rgb[3] = {0, 0, 0};
    if (valid(p)) {
      for (int c = 0; c < 3; ++c) {
        const float span = hi[c] - lo[c];
        const float t = span > 0.0f ? (image.pixel(p)[channel[c]] - lo[c]) / span : 0.5f;
        rgb[c] = static_cast<unsigned char>(std::lround(std::clamp(t, 0.0f, 1.0f) * 255.0f));
      }
    }
    out.write(reinterpret_cast<const char*>(rgb), 3);
  }
}

}  // namespace featloc
