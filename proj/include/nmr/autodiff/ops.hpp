#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nmr/autodiff/tensor.hpp"

namespace nmr::ad {

/// Fixed sparse matrix in CSR form; used for graph Laplacians.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint32_t> row_ptr;  // rows + 1 entries
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  CsrMatrix transposed() const;
};

// All ops record onto the active tape when any input requires a gradient.
// Rank-2 tensors are (rows, cols); "last axis" ops treat rank-1 inputs as a
// single row.

template <typename T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
/// Elementwise a + b.  `b` may also be a rank-1 tensor of length a.cols(),
/// added to every row (bias).
template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(const Tensor<T>& a, T s);
template <typename T> Tensor<T> add_scalar(const Tensor<T>& a, T s);

template <typename T> Tensor<T> relu(const Tensor<T>& a);
template <typename T> Tensor<T> sigmoid(const Tensor<T>& a);
template <typename T> Tensor<T> tanh(const Tensor<T>& a);
template <typename T> Tensor<T> square(const Tensor<T>& a);
template <typename T> Tensor<T> abs(const Tensor<T>& a);
/// min(a, 0) elementwise.
template <typename T> Tensor<T> min_zero(const Tensor<T>& a);

/// Scalar (rank-0) sum / mean of all elements.  Accumulates in double in a
/// fixed order.
template <typename T> Tensor<T> sum(const Tensor<T>& a);
template <typename T> Tensor<T> mean(const Tensor<T>& a);

/// Concatenation along the last axis; all parts share the leading extent.
template <typename T> Tensor<T> concat(const std::vector<Tensor<T>>& parts);
/// Columns [begin, end) of a rank-2 tensor.
template <typename T> Tensor<T> columns(const Tensor<T>& a, std::size_t begin, std::size_t end);
/// Rows a[index[i]]; backward scatter-adds.
template <typename T> Tensor<T> gather(const Tensor<T>& a, std::span<const std::uint32_t> index);
/// out[index[i]] += a[i] for an output of `rows` rows.
template <typename T>
Tensor<T> scatter_add(const Tensor<T>& a, std::span<const std::uint32_t> index, std::size_t rows);

/// Row-wise a / max(|a|, eps).
template <typename T> Tensor<T> l2_normalize(const Tensor<T>& a, T eps = T(1e-12));
/// Row-wise dot product, shape (rows).
template <typename T> Tensor<T> dot(const Tensor<T>& a, const Tensor<T>& b);
/// Row-wise cross product of (n, 3) tensors.
template <typename T> Tensor<T> cross(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> reshape(const Tensor<T>& a, Shape shape);
/// m * x for a fixed sparse m.
template <typename T> Tensor<T> sparse_matmul(const CsrMatrix& m, const Tensor<T>& x);

}  // namespace nmr::ad
