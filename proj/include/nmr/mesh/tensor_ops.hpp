#pragma once

#include <vector>

#include "nmr/autodiff/tensor.hpp"
#include "nmr/mesh/mesh.hpp"

namespace nmr::mesh {

/// Corner index arrays (one per corner slot) for gather/scatter on tensors.
struct FaceCorners {
  std::vector<std::uint32_t> c[3];
  explicit FaceCorners(const std::vector<Face>& faces);
  FaceCorners() = default;
};

/// Differentiable per-face cross products (B - A) x (C - A) from (V, 3)
/// positions; length is twice the face area.
template <typename T>
ad::Tensor<T> face_cross(const ad::Tensor<T>& positions, const FaceCorners& corners);

/// Differentiable unit face normals.
template <typename T>
ad::Tensor<T> face_normals(const ad::Tensor<T>& positions, const FaceCorners& corners);

/// Differentiable area-weighted unit vertex normals.
template <typename T>
ad::Tensor<T> vertex_normals(const ad::Tensor<T>& positions, const FaceCorners& corners);

}  // namespace nmr::mesh
