#pragma once

#include <cstddef>

namespace nmr::kernels {

// Loops shorter than this run serially; OpenMP fork/join costs more than the work.
inline constexpr std::size_t kParallelThreshold = 4096;

int max_threads();
void set_threads(int n);

}  // namespace nmr::kernels

namespace nmr::kernels {

/// Runs f(i) for i in [0, n); statically scheduled across OpenMP threads once
/// n reaches kParallelThreshold.  f must only write state owned by index i.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  if (n < kParallelThreshold) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) f(static_cast<std::size_t>(i));
}

/// Same as parallel_for but always parallel (for coarse-grained work items).
template <class F>
void parallel_for_coarse(std::size_t n, F&& f) {
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < static_cast<long long>(n); ++i) f(static_cast<std::size_t>(i));
}

}  // namespace nmr::kernels
