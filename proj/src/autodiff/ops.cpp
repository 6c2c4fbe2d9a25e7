#include "nmr/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "nmr/kernels/gemm.hpp"
#include "nmr/kernels/parallel.hpp"

namespace nmr::ad {
namespace {

using kernels::parallel_for;

[[noreturn]] void shape_fail(const std::string& op, const std::string& what) {
  throw ShapeError(op + ": " + what);
}

template <typename T>
void require_rank2(const std::string& op, const Tensor<T>& a, const char* name) {
  if (!a.defined()) shape_fail(op, std::string(name) + " is undefined");
  if (a.rank() != 2) {
    shape_fail(op, std::string(name) + " must be rank 2, got " + to_string(a.shape()));
  }
}

template <typename T>
void require_same(const std::string& op, const Tensor<T>& a, const Tensor<T>& b) {
  if (!a.defined() || !b.defined()) shape_fail(op, "undefined operand");
  if (a.shape() != b.shape()) {
    shape_fail(op, "shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
}

/// Elementwise unary op from value and local-derivative functors.  The
/// derivative functor receives (x, y).
template <typename T, class F, class D>
Tensor<T> unary(const char* op, const Tensor<T>& a, F f, D df) {
  if (!a.defined()) shape_fail(op, "undefined operand");
  const auto n = a.size();
  std::vector<T> out(n);
  const T* x = a.data().data();
  parallel_for(n, [&](std::size_t i) { out[i] = f(x[i]); });
  auto an = a.node();
  return record_op<T>(op, a.shape(), std::move(out), {a}, [an, df](const Node<T>& o) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    const T* g = o.grad.data();
    const T* xv = an->value.data();
    const T* yv = o.value.data();
    T* ga = an->grad.data();
    parallel_for(o.value.size(), [&](std::size_t i) { ga[i] += g[i] * df(xv[i], yv[i]); });
  });
}

std::size_t leading(const Shape& s) {
  if (s.size() <= 1) return 1;
  std::size_t n = 1;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) n *= s[i];
  return n;
}

}  // namespace

CsrMatrix CsrMatrix::transposed() const {
  CsrMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(cols + 1, 0);
  for (auto c : col) ++t.row_ptr[c + 1];
  for (std::size_t i = 0; i < cols; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
  t.col.resize(col.size());
  t.val.resize(val.size());
  std::vector<std::uint32_t> fill(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (std::size_t r = 0; r < rows; ++r) {
    for (auto k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      const auto dst = fill[col[k]]++;
      t.col[dst] = static_cast<std::uint32_t>(r);
      t.val[dst] = val[k];
    }
  }
  return t;
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank2("matmul", a, "lhs");
  require_rank2("matmul", b, "rhs");
  const auto m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    shape_fail("matmul", "inner dimensions differ: " + to_string(a.shape()) + " x " +
                             to_string(b.shape()));
  }
  std::vector<T> out(m * n);
  kernels::gemm<T>(kernels::Trans::No, kernels::Trans::No, m, n, k, T(1), a.data().data(),
                   b.data().data(), T(0), out.data());
  auto an = a.node();
  auto bn = b.node();
  return record_op<T>("matmul", {m, n}, std::move(out), {a, b},
                      [an, bn, m, n, k](const Node<T>& o) {
                        if (an->requires_grad) {
                          an->ensure_grad();
                          kernels::gemm<T>(kernels::Trans::No, kernels::Trans::Yes, m, k, n,
                                           T(1), o.grad.data(), bn->value.data(), T(1),
                                           an->grad.data());
                        }
                        if (bn->requires_grad) {
                          bn->ensure_grad();
                          kernels::gemm<T>(kernels::Trans::Yes, kernels::Trans::No, k, n, m,
                                           T(1), an->value.data(), o.grad.data(), T(1),
                                           bn->grad.data());
                        }
                      });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (!a.defined() || !b.defined()) shape_fail("add", "undefined operand");
  const bool bias = a.shape() != b.shape();
  if (bias && !(b.rank() == 1 && a.rank() >= 1 && b.dim(0) == a.cols())) {
    shape_fail("add", "shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  const auto n = a.size();
  const auto c = a.cols();
  std::vector<T> out(n);
  const T* x = a.data().data();
  const T* y = b.data().data();
  if (bias) {
    parallel_for(n / c, [&](std::size_t r) {
      for (std::size_t j = 0; j < c; ++j) out[r * c + j] = x[r * c + j] + y[j];
    });
  } else {
    parallel_for(n, [&](std::size_t i) { out[i] = x[i] + y[i]; });
  }
  auto an = a.node();
  auto bn = b.node();
  return record_op<T>("add", a.shape(), std::move(out), {a, b},
                      [an, bn, bias, c](const Node<T>& o) {
                        accumulate_grad<T>(*an, o.grad);
                        if (!bn->requires_grad) return;
                        if (!bias) {
                          accumulate_grad<T>(*bn, o.grad);
                          return;
                        }
                        std::vector<double> col(c, 0.0);
                        const auto rows = o.grad.size() / c;
                        for (std::size_t r = 0; r < rows; ++r)
                          for (std::size_t j = 0; j < c; ++j) col[j] += o.grad[r * c + j];
                        bn->ensure_grad();
                        for (std::size_t j = 0; j < c; ++j) bn->grad[j] += static_cast<T>(col[j]);
                      });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same("sub", a, b);
  const auto n = a.size();
  std::vector<T> out(n);
  const T* x = a.data().data();
  const T* y = b.data().data();
  parallel_for(n, [&](std::size_t i) { out[i] = x[i] - y[i]; });
  auto an = a.node();
  auto bn = b.node();
  return record_op<T>("sub", a.shape(), std::move(out), {a, b}, [an, bn](const Node<T>& o) {
    accumulate_grad<T>(*an, o.grad);
    if (!bn->requires_grad) return;
    bn->ensure_grad();
    for (std::size_t i = 0; i < o.grad.size(); ++i) bn->grad[i] -= o.grad[i];
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same("mul", a, b);
  const auto n = a.size();
  std::vector<T> out(n);
  const T* x = a.data().data();
  const T* y = b.data().data();
  parallel_for(n, [&](std::size_t i) { out[i] = x[i] * y[i]; });
  auto an = a.node();
  auto bn = b.node();
  return record_op<T>("mul", a.shape(), std::move(out), {a, b}, [an, bn](const Node<T>& o) {
    const auto n = o.grad.size();
    if (an->requires_grad) {
      an->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) an->grad[i] += o.grad[i] * bn->value[i];
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) bn->grad[i] += o.grad[i] * an->value[i];
    }
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s) {
  return unary<T>("scale", a, [s](T x) { return s * x; }, [s](T, T) { return s; });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, T s) {
  return unary<T>("add_scalar", a, [s](T x) { return x + s; }, [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  return unary<T>(
      "relu", a, [](T x) { return x > T(0) ? x : T(0); },
      [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a) {
  return unary<T>(
      "sigmoid", a,
      [](T x) {
        if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
        const T e = std::exp(x);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& a) {
  return unary<T>(
      "tanh", a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Tensor<T> square(const Tensor<T>& a) {
  return unary<T>("square", a, [](T x) { return x * x; }, [](T x, T) { return T(2) * x; });
}

template <typename T>
Tensor<T> abs(const Tensor<T>& a) {
  return unary<T>(
      "abs", a, [](T x) { return std::abs(x); },
      [](T x, T) { return x > T(0) ? T(1) : (x < T(0) ? T(-1) : T(0)); });
}

template <typename T>
Tensor<T> min_zero(const Tensor<T>& a) {
  return unary<T>(
      "min_zero", a, [](T x) { return x < T(0) ? x : T(0); },
      [](T x, T) { return x < T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  if (!a.defined()) shape_fail("sum", "undefined operand");
  double acc = 0.0;
  for (T v : a.data()) acc += v;
  auto an = a.node();
  return record_op<T>("sum", {}, {static_cast<T>(acc)}, {a}, [an](const Node<T>& o) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    const T g = o.grad[0];
    for (auto& v : an->grad) v += g;
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
  if (!a.defined()) shape_fail("mean", "undefined operand");
  if (a.size() == 0) shape_fail("mean", "empty tensor");
  double acc = 0.0;
  for (T v : a.data()) acc += v;
  const double inv = 1.0 / static_cast<double>(a.size());
  auto an = a.node();
  return record_op<T>("mean", {}, {static_cast<T>(acc * inv)}, {a}, [an, inv](const Node<T>& o) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    const T g = static_cast<T>(o.grad[0] * inv);
    for (auto& v : an->grad) v += g;
  });
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) shape_fail("concat", "no operands");
  const auto rows = leading(parts[0].shape());
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (!p.defined() || p.rank() == 0 || leading(p.shape()) != rows ||
        p.rank() != parts[0].rank()) {
      std::string shapes;
      for (const auto& q : parts) shapes += (q.defined() ? to_string(q.shape()) : "?") + " ";
      shape_fail("concat", "incompatible operand shapes " + shapes);
    }
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<T> out(rows * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const T* src = parts[k].data().data();
    const auto w = widths[k];
    parallel_for(rows, [&](std::size_t r) {
      std::copy_n(src + r * w, w, out.data() + r * total + offset);
    });
    offset += w;
  }
  Shape shape = parts[0].shape();
  shape.back() = total;
  std::vector<std::shared_ptr<Node<T>>> nodes;
  for (const auto& p : parts) nodes.push_back(p.node());
  return record_op<T>("concat", std::move(shape), std::move(out), parts,
                      [nodes, widths, total, rows](const Node<T>& o) {
                        std::size_t offset = 0;
                        for (std::size_t k = 0; k < nodes.size(); ++k) {
                          auto& nd = *nodes[k];
                          const auto w = widths[k];
                          if (nd.requires_grad) {
                            nd.ensure_grad();
                            parallel_for(rows, [&](std::size_t r) {
                              for (std::size_t j = 0; j < w; ++j)
                                nd.grad[r * w + j] += o.grad[r * total + offset + j];
                            });
                          }
                          offset += w;
                        }
                      });
}

template <typename T>
Tensor<T> columns(const Tensor<T>& a, std::size_t begin, std::size_t end) {
  require_rank2("columns", a, "operand");
  const auto c = a.cols();
  if (begin >= end || end > c) {
    shape_fail("columns", "range [" + std::to_string(begin) + ", " + std::to_string(end) +
                              ") invalid for shape " + to_string(a.shape()));
  }
  const auto rows = a.rows();
  const auto w = end - begin;
  std::vector<T> out(rows * w);
  const T* src = a.data().data();
  parallel_for(rows, [&](std::size_t r) { std::copy_n(src + r * c + begin, w, out.data() + r * w); });
  auto an = a.node();
  return record_op<T>("columns", {rows, w}, std::move(out), {a},
                      [an, rows, c, w, begin](const Node<T>& o) {
                        if (!an->requires_grad) return;
                        an->ensure_grad();
                        parallel_for(rows, [&](std::size_t r) {
                          for (std::size_t j = 0; j < w; ++j)
                            an->grad[r * c + begin + j] += o.grad[r * w + j];
                        });
                      });
}

template <typename T>
Tensor<T> gather(const Tensor<T>& a, std::span<const std::uint32_t> index) {
  if (!a.defined() || a.rank() == 0 || a.rank() > 2) {
    shape_fail("gather", "operand must be rank 1 or 2");
  }
  const auto rows = a.rank() == 1 ? a.size() : a.rows();
  const auto c = a.rank() == 1 ? std::size_t{1} : a.cols();
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= rows) {
      shape_fail("gather", "index " + std::to_string(index[i]) + " at position " +
                               std::to_string(i) + " out of range for shape " +
                               to_string(a.shape()));
    }
  }
  auto idx = std::make_shared<std::vector<std::uint32_t>>(index.begin(), index.end());
  const auto m = idx->size();
  std::vector<T> out(m * c);
  const T* src = a.data().data();
  parallel_for(m, [&](std::size_t i) { std::copy_n(src + (*idx)[i] * c, c, out.data() + i * c); });
  Shape shape = a.rank() == 1 ? Shape{m} : Shape{m, c};
  auto an = a.node();
  return record_op<T>("gather", std::move(shape), std::move(out), {a},
                      [an, idx, c](const Node<T>& o) {
                        if (!an->requires_grad) return;
                        an->ensure_grad();
                        const auto m = idx->size();
                        for (std::size_t i = 0; i < m; ++i) {
                          T* dst = an->grad.data() + (*idx)[i] * c;
                          const T* g = o.grad.data() + i * c;
                          for (std::size_t j = 0; j < c; ++j) dst[j] += g[j];
                        }
                      });
}

template <typename T>
Tensor<T> scatter_add(const Tensor<T>& a, std::span<const std::uint32_t> index, std::size_t rows) {
  if (!a.defined() || a.rank() == 0 || a.rank() > 2) {
    shape_fail("scatter_add", "operand must be rank 1 or 2");
  }
  const auto m = a.rank() == 1 ? a.size() : a.rows();
  const auto c = a.rank() == 1 ? std::size_t{1} : a.cols();
  if (index.size() != m) {
    shape_fail("scatter_add", std::to_string(index.size()) + " indices for operand of shape " +
                                  to_string(a.shape()));
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (index[i] >= rows) {
      shape_fail("scatter_add", "index " + std::to_string(index[i]) + " out of range for " +
                                    std::to_string(rows) + " output rows");
    }
  }
  auto idx = std::make_shared<std::vector<std::uint32_t>>(index.begin(), index.end());
  std::vector<T> out(rows * c, T(0));
  const T* src = a.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    T* dst = out.data() + (*idx)[i] * c;
    for (std::size_t j = 0; j < c; ++j) dst[j] += src[i * c + j];
  }
  Shape shape = a.rank() == 1 ? Shape{rows} : Shape{rows, c};
  auto an = a.node();
  return record_op<T>("scatter_add", std::move(shape), std::move(out), {a},
                      [an, idx, c](const Node<T>& o) {
                        if (!an->requires_grad) return;
                        an->ensure_grad();
                        parallel_for(idx->size(), [&](std::size_t i) {
                          const T* g = o.grad.data() + (*idx)[i] * c;
                          for (std::size_t j = 0; j < c; ++j) an->grad[i * c + j] += g[j];
                        });
                      });
}

template <typename T>
Tensor<T> l2_normalize(const Tensor<T>& a, T eps) {
  if (!a.defined() || a.rank() == 0) shape_fail("l2_normalize", "operand must have rank >= 1");
  const auto c = a.cols();
  const auto rows = a.size() / c;
  std::vector<T> out(a.size());
  auto norms = std::make_shared<std::vector<T>>(rows);
  const T* x = a.data().data();
  parallel_for(rows, [&](std::size_t r) {
    T s = T(0);
    for (std::size_t j = 0; j < c; ++j) s += x[r * c + j] * x[r * c + j];
    const T len = std::max(std::sqrt(s), eps);
    (*norms)[r] = len;
    for (std::size_t j = 0; j < c; ++j) out[r * c + j] = x[r * c + j] / len;
  });
  auto an = a.node();
  return record_op<T>("l2_normalize", a.shape(), std::move(out), {a},
                      [an, norms, c, eps](const Node<T>& o) {
                        if (!an->requires_grad) return;
                        an->ensure_grad();
                        const auto rows = norms->size();
                        parallel_for(rows, [&](std::size_t r) {
                          const T* y = o.value.data() + r * c;
                          const T* g = o.grad.data() + r * c;
                          T* ga = an->grad.data() + r * c;
                          const T len = (*norms)[r];
                          if (len <= eps) {
                            for (std::size_t j = 0; j < c; ++j) ga[j] += g[j] / eps;
                            return;
                          }
                          T yg = T(0);
                          for (std::size_t j = 0; j < c; ++j) yg += y[j] * g[j];
                          for (std::size_t j = 0; j < c; ++j) ga[j] += (g[j] - y[j] * yg) / len;
                        });
                      });
}

template <typename T>
Tensor<T> dot(const Tensor<T>& a, const Tensor<T>& b) {
  require_same("dot", a, b);
  if (a.rank() == 0) shape_fail("dot", "operands must have rank >= 1");
  const auto c = a.cols();
  const auto rows = a.size() / c;
  std::vector<T> out(rows);
  const T* x = a.data().data();
  const T* y = b.data().data();
  parallel_for(rows, [&](std::size_t r) {
    T s = T(0);
    for (std::size_t j = 0; j < c; ++j) s += x[r * c + j] * y[r * c + j];
    out[r] = s;
  });
  auto an = a.node();
  auto bn = b.node();
  return record_op<T>("dot", {rows}, std::move(out), {a, b}, [an, bn, c](const Node<T>& o) {
    const auto rows = o.value.size();
    if (an->requires_grad) {
      an->ensure_grad();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < c; ++j) an->grad[r * c + j] += o.grad[r] * bn->value[r * c + j];
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < c; ++j) bn->grad[r * c + j] += o.grad[r] * an->value[r * c + j];
    }
  });
}

template <typename T>
Tensor<T> cross(const Tensor<T>& a, const Tensor<T>& b) {
  require_same("cross", a, b);
  if (a.cols() != 3) shape_fail("cross", "last axis must be 3, got " + to_string(a.shape()));
  const auto rows = a.size() / 3;
  std::vector<T> out(a.size());
  const T* x = a.data().data();
  const T* y = b.data().data();
  auto cr = [](const T* p, const T* q, T* r) {
    r[0] = p[1] * q[2] - p[2] * q[1];
    r[1] = p[2] * q[0] - p[0] * q[2];
    r[2] = p[0] * q[1] - p[1] * q[0];
  };
  parallel_for(rows, [&](std::size_t r) { cr(x + 3 * r, y + 3 * r, out.data() + 3 * r); });
  auto an = a.node();
  auto bn = b.node();
  return record_op<T>("cross", a.shape(), std::move(out), {a, b}, [an, bn, cr](const Node<T>& o) {
    const auto rows = o.value.size() / 3;
    if (an->requires_grad) an->ensure_grad();
    if (bn->requires_grad) bn->ensure_grad();
    parallel_for(rows, [&](std::size_t r) {
      const T* g = o.grad.data() + 3 * r;
      T tmp[3];
      if (an->requires_grad) {
        cr(bn->value.data() + 3 * r, g, tmp);  // b x g
        for (int j = 0; j < 3; ++j) an->grad[3 * r + j] += tmp[j];
      }
      if (bn->requires_grad) {
        cr(g, an->value.data() + 3 * r, tmp);  // g x a
        for (int j = 0; j < 3; ++j) bn->grad[3 * r + j] += tmp[j];
      }
    });
  });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
  if (!a.defined() || numel(shape) != a.size()) {
    shape_fail("reshape", "cannot reshape " + (a.defined() ? to_string(a.shape()) : "?") +
                              " to " + to_string(shape));
  }
  std::vector<T> out(a.data().begin(), a.data().end());
  auto an = a.node();
  return record_op<T>("reshape", std::move(shape), std::move(out), {a},
                      [an](const Node<T>& o) { accumulate_grad<T>(*an, o.grad); });
}

template <typename T>
Tensor<T> sparse_matmul(const CsrMatrix& m, const Tensor<T>& x) {
  if (!x.defined() || x.rank() != 2 || x.rows() != m.cols) {
    shape_fail("sparse_matmul", "matrix is " + std::to_string(m.rows) + " x " +
                                    std::to_string(m.cols) + ", operand " +
                                    (x.defined() ? to_string(x.shape()) : "?"));
  }
  const auto c = x.cols();
  std::vector<T> out(m.rows * c, T(0));
  const T* xv = x.data().data();
  auto apply = [c](const CsrMatrix& mat, const T* src, T* dst) {
    parallel_for(mat.rows, [&](std::size_t r) {
      for (auto k = mat.row_ptr[r]; k < mat.row_ptr[r + 1]; ++k) {
        const T w = static_cast<T>(mat.val[k]);
        const T* s = src + static_cast<std::size_t>(mat.col[k]) * c;
        for (std::size_t j = 0; j < c; ++j) dst[r * c + j] += w * s[j];
      }
    });
  };
  apply(m, xv, out.data());
  auto mt = std::make_shared<CsrMatrix>(m.transposed());
  auto xn = x.node();
  return record_op<T>("sparse_matmul", {m.rows, c}, std::move(out), {x},
                      [xn, mt, apply](const Node<T>& o) {
                        if (!xn->requires_grad) return;
                        xn->ensure_grad();
                        apply(*mt, o.grad.data(), xn->grad.data());
                      });
}

#define NMR_INSTANTIATE_OPS(T)                                                              \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                            \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                               \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                               \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                               \
  template Tensor<T> scale(const Tensor<T>&, T);                                            \
  template Tensor<T> add_scalar(const Tensor<T>&, T);                                       \
  template Tensor<T> relu(const Tensor<T>&);                                                \
  template Tensor<T> sigmoid(const Tensor<T>&);                                             \
  template Tensor<T> tanh(const Tensor<T>&);                                                \
  template Tensor<T> square(const Tensor<T>&);                                              \
  template Tensor<T> abs(const Tensor<T>&);                                                 \
  template Tensor<T> min_zero(const Tensor<T>&);                                            \
  template Tensor<T> sum(const Tensor<T>&);                                                 \
  template Tensor<T> mean(const Tensor<T>&);                                                \
  template Tensor<T> concat(const std::vector<Tensor<T>>&);                                 \
  template Tensor<T> columns(const Tensor<T>&, std::size_t, std::size_t);                   \
  template Tensor<T> gather(const Tensor<T>&, std::span<const std::uint32_t>);              \
  template Tensor<T> scatter_add(const Tensor<T>&, std::span<const std::uint32_t>,          \
                                 std::size_t);                                              \
  template Tensor<T> l2_normalize(const Tensor<T>&, T);                                     \
  template Tensor<T> dot(const Tensor<T>&, const Tensor<T>&);                               \
  template Tensor<T> cross(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                      \
  template Tensor<T> sparse_matmul(const CsrMatrix&, const Tensor<T>&);

NMR_INSTANTIATE_OPS(float)
NMR_INSTANTIATE_OPS(double)

#undef NMR_INSTANTIATE_OPS

}  // namespace nmr::ad
