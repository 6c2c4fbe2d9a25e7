#include "nmr/kernels/gemm.hpp"

#include <Eigen/Core>

namespace nmr::kernels {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using ConstMap = Eigen::Map<const RowMat<T>>;

}  // namespace

template <typename T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, T alpha,
          const T* a, const T* b, T beta, T* c) {
  Eigen::Map<RowMat<T>> C(c, m, n);
  if (m == 0 || n == 0) return;
  if (beta == T(0)) {
    C.setZero();
  } else if (beta != T(1)) {
    C *= beta;
  }
  if (k == 0) return;
  const bool at = ta == Trans::Yes;
  const bool bt = tb == Trans::Yes;
  ConstMap<T> A(a, at ? k : m, at ? m : k);
  ConstMap<T> B(b, bt ? n : k, bt ? k : n);
  if (!at && !bt) {
    C.noalias() += alpha * A * B;
  } else if (at && !bt) {
    C.noalias() += alpha * A.transpose() * B;
  } else if (!at && bt) {
    C.noalias() += alpha * A * B.transpose();
  } else {
    C.noalias() += alpha * A.transpose() * B.transpose();
  }
}

namespace reference {

template <typename T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, T alpha,
          const T* a, const T* b, T beta, T* c) {
  const bool at = ta == Trans::Yes;
  const bool bt = tb == Trans::Yes;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T acc = T(0);
      for (std::size_t p = 0; p < k; ++p) {
        const T av = at ? a[p * m + i] : a[i * k + p];
        const T bv = bt ? b[j * k + p] : b[p * n + j];
        acc += av * bv;
      }
      T& out = c[i * n + j];
      out = (beta == T(0) ? T(0) : beta * out) + alpha * acc;
    }
  }
}

template void gemm<float>(Trans, Trans, std::size_t, std::size_t, std::size_t, float,
                          const float*, const float*, float, float*);
template void gemm<double>(Trans, Trans, std::size_t, std::size_t, std::size_t, double,
                           const double*, const double*, double, double*);

}  // namespace reference

template void gemm<float>(Trans, Trans, std::size_t, std::size_t, std::size_t, float,
                          const float*, const float*, float, float*);
template void gemm<double>(Trans, Trans, std::size_t, std::size_t, std::size_t, double,
                           const double*, const double*, double, double*);

}  // namespace nmr::kernels
