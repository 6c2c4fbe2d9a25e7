#pragma once

#include <array>
#include <span>

#include "nmr/autodiff/tensor.hpp"
#include "nmr/raster/rasterize.hpp"

namespace nmr::raster {

/// Weights of corners (A, B, C) at the intersection of the ray o + s d with
/// the plane of the triangle.
std::array<double, 3> ray_barycentrics(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b, const Vec3& c);

/// Perspective-correct interpolation of per-vertex attributes (V, C) at the
/// listed covered pixels, returning (P, C) in list order.  Weights come from
/// intersecting each pixel-center ray with the owning triangle in world
/// space, so the backward pass reaches `positions` (V, 3) through the
/// weights as well as `attributes` through the blend.
template <typename T>
ad::Tensor<T> interpolate(const ad::Tensor<T>& attributes, const ad::Tensor<T>& positions,
                          const std::vector<mesh::Face>& faces, const RasterFrame& frame, const Camera& cam,
                          std::span<const std::uint32_t> pixels);

}  // namespace nmr::raster
