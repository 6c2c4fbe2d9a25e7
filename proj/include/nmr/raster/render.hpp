#pragma once

#include <functional>
#include <vector>

#include "nmr/autodiff/tensor.hpp"
#include "nmr/mesh/tensor_ops.hpp"
#include "nmr/raster/antialias.hpp"
#include "nmr/raster/interpolate.hpp"

namespace nmr::raster {

/// Per-vertex inputs of the deferred pipeline.  features and diffuse may be
/// undefined.
template <typename T>
struct SurfaceAttributes {
  ad::Tensor<T> positions;  // (V, 3)
  ad::Tensor<T> normals;    // (V, 3)
  ad::Tensor<T> features;   // (V, F)
  ad::Tensor<T> diffuse;    // (V, 3)
};

/// Interpolated attributes at a list of covered pixels, one row per pixel.
template <typename T>
struct PixelAttributes {
  std::vector<std::uint32_t> pixels;
  ad::Tensor<T> positions;  // (P, 3)
  ad::Tensor<T> normals;    // (P, 3) unit
  ad::Tensor<T> features;   // (P, F) or undefined
  ad::Tensor<T> diffuse;    // (P, 3) or undefined
  ad::Tensor<T> view_dirs;  // (P, 3) unit, surface point toward the camera center
};

/// Returns the per-pixel color term added to the interpolated diffuse (the
/// specular term, or the full color when there is no diffuse attribute).
template <typename T>
using PixelShader = std::function<ad::Tensor<T>(const PixelAttributes<T>&)>;

/// Interpolates every defined surface attribute at `pixels` with one
/// interpolation op; normals are re-normalized.
template <typename T>
PixelAttributes<T> gather_pixels(const SurfaceAttributes<T>& surface, const std::vector<mesh::Face>& faces,
                                 const RasterFrame& frame, const Camera& cam, std::vector<std::uint32_t> pixels);

/// clamp(diffuse + shader(attrs), 0, 1) at the gathered pixels, (P, 3).
template <typename T>
ad::Tensor<T> shade_pixels(const PixelAttributes<T>& attrs, const PixelShader<T>& shader);

/// Differentiable soft coverage (H*W, 1): the antialiased hard mask.
template <typename T>
ad::Tensor<T> soft_mask(const ad::Tensor<T>& positions, const std::vector<mesh::Face>& faces,
                        const FaceNeighbors& neighbors, const RasterFrame& frame, const Camera& cam);

/// Value-only per-pixel maps of one frame; uncovered pixels are zero.
struct GBuffer {
  RasterFrame frame;
  std::vector<double> coverage;  // soft mask
  std::vector<double> position, normal, diffuse;  // (H*W) x 3
  std::vector<double> feature;                    // (H*W) x feature_dim
  std::size_t feature_dim = 0;
};

template <typename T>
struct RenderOutput {
  ad::Tensor<T> image;  // (H*W, 3), antialiased, composited over the background
  ad::Tensor<T> mask;   // (H*W, 1) soft coverage
  GBuffer gbuffer;
};

/// Full deferred pipeline: rasterize, interpolate the g-buffer, shade every
/// covered pixel, composite over `background` and antialias the silhouettes.
template <typename T>
RenderOutput<T> render(const Camera& cam, const SurfaceAttributes<T>& surface, const std::vector<mesh::Face>& faces,
                       const FaceNeighbors& neighbors, const PixelShader<T>& shader, const Vec3& background);

/// Rows of an (n, 3) tensor as points.
template <typename T>
std::vector<Vec3> tensor_points(const ad::Tensor<T>& t);

}  // namespace nmr::raster
