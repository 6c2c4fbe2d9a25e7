#include "nmr/encodings/sh.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "nmr/autodiff/ops.hpp"
#include "nmr/kernels/parallel.hpp"

namespace nmr::enc {
namespace {

std::atomic<std::size_t> g_warnings{0};

constexpr double C0 = 0.28209479177387814;
constexpr double C1 = 0.48860251190291987;
constexpr double C2a = 1.0925484305920792;
constexpr double C2b = 0.94617469575755997;
constexpr double C2c = 0.31539156525251999;
constexpr double C2d = 0.54627421529603959;
constexpr double C3a = 0.59004358992664352;
constexpr double C3b = 2.8906114426405538;
constexpr double C3c = 0.45704579946446572;
constexpr double C3d = 0.3731763325901154;
constexpr double C3e = 1.4453057213202769;

void basis(double x, double y, double z, double* o) {
  const double x2 = x * x, y2 = y * y, z2 = z * z;
  o[0] = C0;
  if (kShDegree <= 1) return;
  o[1] = -C1 * y;
  o[2] = C1 * z;
  o[3] = -C1 * x;
  if (kShDegree <= 2) return;
  o[4] = C2a * x * y;
  o[5] = -C2a * y * z;
  o[6] = C2b * z2 - C2c;
  o[7] = -C2a * x * z;
  o[8] = C2d * (x2 - y2);
  if (kShDegree <= 3) return;
  o[9] = C3a * y * (-3.0 * x2 + y2);
  o[10] = C3b * x * y * z;
  o[11] = C3c * y * (1.0 - 5.0 * z2);
  o[12] = C3d * z * (5.0 * z2 - 3.0);
  o[13] = C3c * x * (1.0 - 5.0 * z2);
  o[14] = C3e * z * (x2 - y2);
  o[15] = C3a * x * (-x2 + 3.0 * y2);
}

// d[k] = d basis_k / d(x, y, z).
void basis_grad(double x, double y, double z, double (*d)[3]) {
  const double x2 = x * x, y2 = y * y, z2 = z * z;
  auto set = [&](int k, double a, double b, double c) {
    d[k][0] = a;
    d[k][1] = b;
    d[k][2] = c;
  };
  set(0, 0, 0, 0);
  if (kShDegree <= 1) return;
  set(1, 0, -C1, 0);
  set(2, 0, 0, C1);
  set(3, -C1, 0, 0);
  if (kShDegree <= 2) return;
  set(4, C2a * y, C2a * x, 0);
  set(5, 0, -C2a * z, -C2a * y);
  set(6, 0, 0, 2 * C2b * z);
  set(7, -C2a * z, 0, -C2a * x);
  set(8, 2 * C2d * x, -2 * C2d * y, 0);
  if (kShDegree <= 3) return;
  set(9, -6 * C3a * x * y, C3a * (3 * y2 - 3 * x2), 0);
  set(10, C3b * y * z, C3b * x * z, C3b * x * y);
  set(11, 0, C3c * (1 - 5 * z2), -10 * C3c * y * z);
  set(12, 0, 0, C3d * (15 * z2 - 3));
  set(13, C3c * (1 - 5 * z2), 0, -10 * C3c * x * z);
  set(14, 2 * C3e * x * z, -2 * C3e * y * z, C3e * (x2 - y2));
  set(15, C3a * (3 * y2 - 3 * x2), 6 * C3a * x * y, 0);
}

template <typename T>
ad::Tensor<T> sh_basis(const ad::Tensor<T>& v) {
  const std::size_t n = v.dim(0);
  std::vector<T> out(n * kShDim);
  const T* p = v.data().data();
  kernels::parallel_for(n, [&](std::size_t i) {
    double o[16];
    basis(p[i * 3], p[i * 3 + 1], p[i * 3 + 2], o);
    for (std::size_t k = 0; k < kShDim; ++k) out[i * kShDim + k] = static_cast<T>(o[k]);
  });
  auto vn = v.node();
  return ad::record_op<T>("sh_encode", {n, kShDim}, std::move(out), {v}, [vn, n](const ad::Node<T>& o) {
    if (!vn->requires_grad) return;
    vn->ensure_grad();
    const T* g = o.grad.data();
    const T* p = vn->value.data();
    T* gv = vn->grad.data();
    kernels::parallel_for(n, [&](std::size_t i) {
      double d[16][3];
      basis_grad(p[i * 3], p[i * 3 + 1], p[i * 3 + 2], d);
      for (int a = 0; a < 3; ++a) {
        double s = 0;
        for (std::size_t k = 0; k < kShDim; ++k) s += double(g[i * kShDim + k]) * d[k][a];
        gv[i * 3 + a] += static_cast<T>(s);
      }
    });
  });
}

}  // namespace

template <typename T>
ad::Tensor<T> sh_encode(const ad::Tensor<T>& dirs) {
  if (!dirs.defined() || dirs.rank() != 2 || dirs.dim(1) != 3) {
    throw ad::ShapeError("sh_encode: directions must be (n, 3), got " +
                         (dirs.defined() ? ad::to_string(dirs.shape()) : std::string("<undefined>")));
  }
  const T* p = dirs.data().data();
  std::size_t off_unit = 0;
  for (std::size_t i = 0; i < dirs.dim(0); ++i) {
    const double len = std::sqrt(double(p[i * 3]) * p[i * 3] + double(p[i * 3 + 1]) * p[i * 3 + 1] +
                                 double(p[i * 3 + 2]) * p[i * 3 + 2]);
    if (std::abs(len - 1.0) > 1e-4) ++off_unit;
  }
  if (off_unit == 0) return sh_basis(dirs);
  g_warnings += off_unit;
  return sh_basis(ad::l2_normalize(dirs));
}

std::size_t sh_warning_count() { return g_warnings.load(); }
void reset_sh_warning_count() { g_warnings = 0; }

template ad::Tensor<float> sh_encode(const ad::Tensor<float>&);
template ad::Tensor<double> sh_encode(const ad::Tensor<double>&);

}  // namespace nmr::enc
