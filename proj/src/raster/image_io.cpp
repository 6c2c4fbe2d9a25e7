#include "nmr/raster/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>

#include <png.h>

namespace nmr::raster {

void save_png(const Image& img, const std::filesystem::path& path) {
  if (img.channels != 1 && img.channels != 3)
    throw ImageError(path.string() + ": PNG output supports 1 or 3 channels, got " + std::to_string(img.channels));
  if (img.data.size() != img.pixel_count() * img.channels || img.width <= 0 || img.height <= 0)
    throw ImageError(path.string() + ": image buffer does not match its size");
  std::vector<std::uint8_t> bytes(img.data.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const float v = std::isfinite(img.data[i]) ? std::clamp(img.data[i], 0.0f, 1.0f) : 0.0f;
    bytes[i] = static_cast<std::uint8_t>(std::lround(255.0f * v));
  }
  png_image pi;
  std::memset(&pi, 0, sizeof(pi));
  pi.version = PNG_IMAGE_VERSION;
  pi.width = static_cast<png_uint_32>(img.width);
  pi.height = static_cast<png_uint_32>(img.height);
  pi.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&pi, path.string().c_str(), 0, bytes.data(), 0, nullptr))
    throw ImageError(path.string() + ": " + pi.message);
}

Image load_png(const std::filesystem::path& path, int channels) {
  if (channels != 1 && channels != 3) throw ImageError("load_png: channels must be 1 or 3");
  png_image pi;
  std::memset(&pi, 0, sizeof(pi));
  pi.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&pi, path.string().c_str()))
    throw ImageError(path.string() + ": " + pi.message);
  pi.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(pi));
  if (!png_image_finish_read(&pi, nullptr, bytes.data(), 0, nullptr)) {
    const std::string msg = pi.message;
    png_image_free(&pi);
    throw ImageError(path.string() + ": " + msg);
  }
  Image img(static_cast<int>(pi.width), static_cast<int>(pi.height), channels);
  for (std::size_t i = 0; i < bytes.size(); ++i) img.data[i] = bytes[i] / 255.0f;
  return img;
}

template <typename T>
Image tensor_image(const ad::Tensor<T>& t, int width, int height) {
  if (t.rank() != 2 || t.rows() != std::size_t(width) * height)
    throw ImageError("tensor_image: tensor does not have H*W rows");
  Image img(width, height, static_cast<int>(t.cols()));
  const auto d = t.data();
  for (std::size_t i = 0; i < d.size(); ++i) img.data[i] = static_cast<float>(d[i]);
  return img;
}

template Image tensor_image(const ad::Tensor<float>&, int, int);
template Image tensor_image(const ad::Tensor<double>&, int, int);

}  // namespace nmr::raster
