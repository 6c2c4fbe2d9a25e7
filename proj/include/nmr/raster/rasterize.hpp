#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nmr/raster/camera.hpp"

namespace nmr::raster {

inline constexpr std::int32_t kNoTriangle = -1;

/// Hard visibility for one view.  Per pixel (row-major): winning triangle,
/// screen-space barycentrics (u weights corner 0, v corner 1), their
/// perspective-corrected counterparts and camera-space depth.  Uncovered
/// pixels hold kNoTriangle and zeros.
struct RasterFrame {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> tri;
  std::vector<double> u, v;
  std::vector<double> pu, pv;
  std::vector<double> depth;
  Projection projection;
  /// Per face: front-facing with all corners in front of the near plane.
  std::vector<std::uint8_t> face_visible;

  std::size_t pixel_count() const { return tri.size(); }
  bool covered(std::size_t p) const { return tri[p] != kNoTriangle; }
  std::size_t covered_count() const;
  std::vector<std::uint32_t> covered_pixels() const;
};

/// Per-face visibility: front-facing (face normal toward the camera center)
/// and not touching a near-plane-flagged vertex.
std::vector<std::uint8_t> visible_faces(const Camera& cam, std::span<const Vec3> vertices,
                                        const std::vector<mesh::Face>& faces, const Projection& proj);

/// Z-buffered rasterization.  Coverage is inclusive on edges; equal depths go
/// to the lower triangle index.  Parallel over row tiles.
RasterFrame rasterize(const Camera& cam, std::span<const Vec3> vertices, const std::vector<mesh::Face>& faces);

namespace reference {
/// Serial brute force: every pixel tests every face.  Same arithmetic as the
/// tiled version, so results are bitwise identical.
RasterFrame rasterize(const Camera& cam, std::span<const Vec3> vertices, const std::vector<mesh::Face>& faces);
}  // namespace reference

}  // namespace nmr::raster
