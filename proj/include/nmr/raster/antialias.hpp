#pragma once

#include <array>
#include <vector>

#include "nmr/autodiff/tensor.hpp"
#include "nmr/raster/rasterize.hpp"

namespace nmr::raster {

/// neighbors[f][k]: the face across the edge from corner k to corner k + 1,
/// mesh::kNoFace on open or non-manifold edges.
using FaceNeighbors = std::vector<std::array<std::uint32_t, 3>>;
FaceNeighbors face_neighbors(const std::vector<mesh::Face>& faces);

/// Silhouette antialiasing of a full-frame image (H*W, C).  For each
/// horizontally or vertically adjacent pixel pair owned by different
/// triangles, the silhouette edge of the nearer triangle that crosses the
/// segment between pixel centers blends the two colors by the signed
/// center-to-edge distance over a 1-pixel band.  Differentiable with respect
/// to the image and to vertex positions (V, 3) through the projected edge.
template <typename T>
ad::Tensor<T> antialias(const ad::Tensor<T>& image, const ad::Tensor<T>& positions,
                        const std::vector<mesh::Face>& faces, const FaceNeighbors& neighbors,
                        const RasterFrame& frame, const Camera& cam);

namespace reference {
/// Serial version of the same pass.
template <typename T>
ad::Tensor<T> antialias(const ad::Tensor<T>& image, const ad::Tensor<T>& positions,
                        const std::vector<mesh::Face>& faces, const FaceNeighbors& neighbors,
                        const RasterFrame& frame, const Camera& cam);
}  // namespace reference

}  // namespace nmr::raster
