#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace featloc {

/// Per-pixel n-dimensional descriptor field, stored pixel-interleaved.
class DescriptorImage {
 public:
  DescriptorImage() = default;
  DescriptorImage(int width, int height, int dim, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  int dim() const { return dim_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

  std::span<float> at(int u, int v) {
    return {values_.data() + offset(u, v), static_cast<std::size_t>(dim_)};
  }
  std::span<const float> at(int u, int v) const {
    return {values_.data() + offset(u, v), static_cast<std::size_t>(dim_)};
  }
  std::span<const float> pixel(std::size_t index) const {
    return {values_.data() + index * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<float> pixel(std::size_t index) {
    return {values_.data() + index * dim_, static_cast<std::size_t>(dim_)};
  }

  const std::vector<float>& values() const { return values_; }
  std::vector<float>& values() { return values_; }

  /// Bilinear read at continuous coordinates (pixel i covers [i, i+1)).
  /// Requires (u, v) inside [0, width) x [0, height); samples outside the
  /// ring of pixel centres clamp to the edge. Throws InvalidArgument
  /// otherwise.
  Eigen::VectorXd sample(double u, double v) const;

  bool all_finite() const;

  bool operator==(const DescriptorImage& other) const = default;

 private:
  std::size_t offset(int u, int v) const {
    return (static_cast<std::size_t>(v) * width_ + u) * dim_;
  }

  int width_ = 0;
  int height_ = 0;
  int dim_ = 0;
  std::vector<float> values_;
};

/// FDESC1: magic "FDESC1\0\0", u32 version, u32 width, u32 height, u32 dim,
/// then `dim` planar f32 channels, each row-major. Little-endian.
void save_fdesc(const DescriptorImage& image, const std::filesystem::path& path);
DescriptorImage load_fdesc(const std::filesystem::path& path);

/// Binary PPM of the first three channels, each mapped affinely from its
/// [min, max] over the masked pixels onto [0, 255]. Pixels with mask 0 are
/// black. Fewer than three channels are repeated.
void write_descriptor_ppm(const DescriptorImage& image, std::span<const std::uint8_t> mask,
                          const std::filesystem::path& path);

}  // namespace featloc
