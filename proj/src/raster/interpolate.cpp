#include "nmr/raster/interpolate.hpp"

#include <memory>
#include <string>

#include <Eigen/Geometry>

#include "nmr/kernels/parallel.hpp"

namespace nmr::raster {

namespace {

template <typename T>
Vec3 row3(const std::vector<T>& v, std::uint32_t i) {
  return Vec3(double(v[i * 3]), double(v[i * 3 + 1]), double(v[i * 3 + 2]));
}

struct PixelRay {
  mesh::Face corners;
  Vec3 d;
  double beta, gamma;  // weights of corners 1 and 2
};

}  // namespace

std::array<double, 3> ray_barycentrics(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a, e2 = c - a, s = o - a;
  const double det = e1.dot(e2.cross(d));
  const double beta = s.dot(e2.cross(d)) / det;
  const double gamma = s.dot(d.cross(e1)) / det;
  return {1.0 - beta - gamma, beta, gamma};
}

template <typename T>
ad::Tensor<T> interpolate(const ad::Tensor<T>& attributes, const ad::Tensor<T>& positions,
                          const std::vector<mesh::Face>& faces, const RasterFrame& frame, const Camera& cam,
                          std::span<const std::uint32_t> pixels) {
  if (attributes.rank() != 2) throw ad::ShapeError("interpolate: attributes must be (V, C)");
  if (positions.rank() != 2 || positions.cols() != 3 || positions.rows() != attributes.rows())
    throw ad::ShapeError("interpolate: positions must be (V, 3) matching the attributes");
  const std::size_t C = attributes.cols(), P = pixels.size();
  const Vec3 o = cam.center();
  const auto& pos = positions.node()->value;
  const auto& attr = attributes.node()->value;

  auto rays = std::make_shared<std::vector<PixelRay>>(P);
  for (std::size_t i = 0; i < P; ++i) {
    const std::uint32_t p = pixels[i];
    if (p >= frame.pixel_count() || !frame.covered(p))
      throw std::invalid_argument("interpolate: pixel " + std::to_string(p) + " is not covered");
  }
  std::vector<T> out(P * C);
  kernels::parallel_for(P, [&](std::size_t i) {
    const std::uint32_t p = pixels[i];
    PixelRay& r = (*rays)[i];
    r.corners = faces[std::size_t(frame.tri[p])];
    r.d = cam.ray_direction((p % frame.width) + 0.5, double(p / frame.width) + 0.5);
    const auto w = ray_barycentrics(o, r.d, row3(pos, r.corners[0]), row3(pos, r.corners[1]), row3(pos, r.corners[2]));
    r.beta = w[1];
    r.gamma = w[2];
    const T* a = attr.data() + std::size_t(r.corners[0]) * C;
    const T* b = attr.data() + std::size_t(r.corners[1]) * C;
    const T* c = attr.data() + std::size_t(r.corners[2]) * C;
    for (std::size_t k = 0; k < C; ++k)
      out[i * C + k] = static_cast<T>(w[0] * double(a[k]) + w[1] * double(b[k]) + w[2] * double(c[k]));
  });

  auto an = attributes.node();
  auto pn = positions.node();
  return ad::record_op<T>(
      "interpolate", {P, C}, std::move(out), {attributes, positions},
      [an, pn, rays, o, C](const ad::Node<T>& node) {
        const T* g = node.grad.data();
        const std::size_t P = rays->size();
        if (an->requires_grad) {
          an->ensure_grad();
          T* ga = an->grad.data();
          for (std::size_t i = 0; i < P; ++i) {
            const PixelRay& r = (*rays)[i];
            const double w[3] = {1.0 - r.beta - r.gamma, r.beta, r.gamma};
            for (int j = 0; j < 3; ++j) {
              T* dst = ga + std::size_t(r.corners[j]) * C;
              for (std::size_t k = 0; k < C; ++k) dst[k] += static_cast<T>(w[j] * double(g[i * C + k]));
            }
          }
        }
        if (pn->requires_grad) {
          pn->ensure_grad();
          T* gp = pn->grad.data();
          const auto& attr = an->value;
          const auto& pos = pn->value;
          for (std::size_t i = 0; i < P; ++i) {
            const PixelRay& r = (*rays)[i];
            const T* a = attr.data() + std::size_t(r.corners[0]) * C;
            const T* b = attr.data() + std::size_t(r.corners[1]) * C;
            const T* c = attr.data() + std::size_t(r.corners[2]) * C;
            double gb = 0, gc = 0;
            for (std::size_t k = 0; k < C; ++k) {
              const double gk = double(g[i * C + k]);
              gb += gk * (double(b[k]) - double(a[k]));
              gc += gk * (double(c[k]) - double(a[k]));
            }
            if (gb == 0 && gc == 0) continue;
            const Vec3 A = row3(pos, r.corners[0]);
            const Vec3 e1 = row3(pos, r.corners[1]) - A, e2 = row3(pos, r.corners[2]) - A, s = o - A;
            const Vec3& d = r.d;
            const Vec3 e2xd = e2.cross(d), dxe1 = d.cross(e1);
            const double det = e1.dot(e2xd);
            const double mix = gb * r.beta + gc * r.gamma;
            const Vec3 g_s = (gb * e2xd + gc * dxe1) / det;
            const Vec3 g_e1 = (gc * s.cross(d) - mix * e2xd) / det;
            const Vec3 g_e2 = (gb * d.cross(s) - mix * dxe1) / det;
            const Vec3 g_a = -g_s - g_e1 - g_e2;
            for (int ax = 0; ax < 3; ++ax) {
              gp[std::size_t(r.corners[0]) * 3 + ax] += static_cast<T>(g_a[ax]);
              gp[std::size_t(r.corners[1]) * 3 + ax] += static_cast<T>(g_e1[ax]);
              gp[std::size_t(r.corners[2]) * 3 + ax] += static_cast<T>(g_e2[ax]);
            }
          }
        }
      });
}

template ad::Tensor<float> interpolate(const ad::Tensor<float>&, const ad::Tensor<float>&,
                                       const std::vector<mesh::Face>&, const RasterFrame&, const Camera&,
                                       std::span<const std::uint32_t>);
template ad::Tensor<double> interpolate(const ad::Tensor<double>&, const ad::Tensor<double>&,
                                        const std::vector<mesh::Face>&, const RasterFrame&, const Camera&,
                                        std::span<const std::uint32_t>);

}  // namespace nmr::raster
