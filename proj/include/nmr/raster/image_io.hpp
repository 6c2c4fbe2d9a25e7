#pragma once

#include <filesystem>
#include <stdexcept>
#include <vector>

#include "nmr/autodiff/tensor.hpp"

namespace nmr::raster {

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major float image, values nominally in [0, 1].
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;

  Image() = default;
  Image(int w, int h, int c, float fill = 0.0f) : width(w), height(h), channels(c), data(std::size_t(w) * h * c, fill) {}
  std::size_t pixel_count() const { return std::size_t(width) * height; }
  float& at(std::size_t pixel, int c) { return data[pixel * channels + c]; }
  float at(std::size_t pixel, int c) const { return data[pixel * channels + c]; }
};

/// 8-bit PNG: 1 channel as grayscale, 3 as RGB.  Values are clamped to [0, 1]
/// and stored as round(255 v).
void save_png(const Image& img, const std::filesystem::path& path);

/// Reads any PNG and converts to `channels` (1 = gray, 3 = RGB).
Image load_png(const std::filesystem::path& path, int channels);

/// (H*W, C) tensor values as an image.
template <typename T>
Image tensor_image(const ad::Tensor<T>& t, int width, int height);

}  // namespace nmr::raster
