#include "nmr/raster/camera.hpp"

#include <cmath>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/LU>

namespace nmr::raster {

void Camera::validate() const {
  if (width <= 0 || height <= 0)
    throw CameraError("camera size must be positive, got " + std::to_string(width) + "x" + std::to_string(height));
  if (!K.allFinite() || !R.allFinite() || !t.allFinite()) throw CameraError("camera has non-finite entries");
  const double orth = (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (orth > 1e-5) throw CameraError("R is not orthonormal (max deviation " + std::to_string(orth) + ")");
  if (std::abs(R.determinant() - 1.0) > 1e-5) throw CameraError("R has determinant != +1");
  if (K(1, 0) != 0 || K(2, 0) != 0 || K(2, 1) != 0 || K(2, 2) != 1)
    throw CameraError("K must be upper triangular with K22 = 1");
  if (!(K(0, 0) > 0) || !(K(1, 1) > 0)) throw CameraError("K focal entries must be positive");
}

Vec3 Camera::ray_direction(double px, double py) const {
  // Inverse of the upper-triangular K applied to (px, py, 1).
  const double yc = (py - K(1, 2)) / K(1, 1);
  const double xc = (px - K(0, 2) - K(0, 1) * yc) / K(0, 0);
  return R.transpose() * Vec3(xc, yc, 1.0);
}

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up, int width, int height,
                       double focal_px) {
  const Vec3 f = (target - eye).normalized();
  Vec3 right = f.cross(up);
  if (right.norm() < 1e-9) throw CameraError("look_at: up is parallel to the view direction");
  right.normalize();
  const Vec3 down = f.cross(right);
  Camera c;
  c.R.row(0) = right.transpose();
  c.R.row(1) = down.transpose();
  c.R.row(2) = f.transpose();
  c.t = -c.R * eye;
  c.K << focal_px, 0, width / 2.0, 0, focal_px, height / 2.0, 0, 0, 1;
  c.width = width;
  c.height = height;
  return c;
}

Projection project_vertices(const Camera& cam, std::span<const Vec3> vertices) {
  Projection p;
  p.screen.resize(vertices.size());
  p.depth.resize(vertices.size());
  p.valid.resize(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Vec3 x = cam.R * vertices[i] + cam.t;
    p.depth[i] = x.z();
    if (!(x.z() > kNearPlane) || !x.allFinite()) {
      p.valid[i] = 0;
      p.screen[i] = Vec2::Zero();
      continue;
    }
    p.valid[i] = 1;
    p.screen[i] = Vec2((cam.K(0, 0) * x.x() + cam.K(0, 1) * x.y()) / x.z() + cam.K(0, 2),
                       cam.K(1, 1) * x.y() / x.z() + cam.K(1, 2));
  }
  return p;
}

Eigen::Matrix<double, 2, 3> projection_jacobian(const Camera& cam, const Vec3& world) {
  const Vec3 x = cam.R * world + cam.t;
  const double iz = 1.0 / x.z();
  Eigen::Matrix<double, 2, 3> j;
  j << cam.K(0, 0) * iz, cam.K(0, 1) * iz, -(cam.K(0, 0) * x.x() + cam.K(0, 1) * x.y()) * iz * iz,
      0, cam.K(1, 1) * iz, -cam.K(1, 1) * x.y() * iz * iz;
  return j * cam.R;
}

}  // namespace nmr::raster
