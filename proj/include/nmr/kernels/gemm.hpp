#pragma once

#include <cstddef>

namespace nmr::kernels {

enum class Trans { No, Yes };

/// Row-major C = alpha * op(A) * op(B) + beta * C, with op(A) of size m x k and
/// op(B) of size k x n.  Backed by Eigen's blocked gemm, which threads through
/// OpenMP; each output element is owned by exactly one thread so results are
/// reproducible for a fixed thread count.
template <typename T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, T alpha,
          const T* a, const T* b, T beta, T* c);

namespace reference {

/// Naive triple loop with the same contract as kernels::gemm.  Serial; kept
/// as the oracle for tests and as the baseline for benchmarks.
template <typename T>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, T alpha,
          const T* a, const T* b, T beta, T* c);

}  // namespace reference
}  // namespace nmr::kernels
