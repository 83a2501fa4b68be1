#pragma once

#include <cstddef>
#include <vector>

namespace featloc {

/// Dense row-major single-channel image.
template <typename T>
struct Image {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  T& operator()(int u, int v) { return data[static_cast<std::size_t>(v) * width + u]; }
  const T& operator()(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }
  std::size_t size() const { return data.size(); }
};

/// Camera-frame z depth per pixel, in metres. Non-positive or non-finite
/// entries mean "no surface".
using DepthImage = Image<double>;

}  // namespace featloc
