#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "nmr/mesh/mesh.hpp"

namespace nmr::raster {

using mesh::Vec3;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kNearPlane = 0.01;

class CameraError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Pinhole camera, OpenCV convention: x_cam = R x + t, x right, y down,
/// z forward.  Pixel (i, j) has its center at (i + 0.5, j + 0.5), origin at
/// the top-left corner.
struct Camera {
  Mat3 K = Mat3::Identity();
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  int width = 0;
  int height = 0;

  /// Throws CameraError unless R is a rotation (within 1e-5), K is upper
  /// triangular with positive focal entries and the size is positive.
  void validate() const;
  std::size_t pixel_count() const { return std::size_t(width) * std::size_t(height); }
  Vec3 center() const { return -R.transpose() * t; }
  /// World-space (unnormalized) direction of the ray through image point (px, py).
  Vec3 ray_direction(double px, double py) const;
  /// Camera at `eye` looking at `target`; `up` fixes the roll.
  static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, int width, int height,
                        double focal_px);
};

struct Projection {
  std::vector<Vec2> screen;
  std::vector<double> depth;
  /// 0 for vertices at or behind the near plane.
  std::vector<std::uint8_t> valid;
};

/// Screen coordinates and camera-space depth of every vertex.
Projection project_vertices(const Camera& cam, std::span<const Vec3> vertices);

/// d(screen) / d(world) at a world point (2 x 3).
Eigen::Matrix<double, 2, 3> projection_jacobian(const Camera& cam, const Vec3& world);

}  // namespace nmr::raster
