#include "nmr/losses/losses.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nmr::losses {

namespace {

std::atomic<std::size_t> g_empty_samples{0};

template <typename T>
ad::Tensor<T> mean_over(const ad::Tensor<T>& x, std::size_t n) {
  return ad::scale(ad::sum(x), static_cast<T>(1.0 / double(n)));
}

void check_rows3(const char* what, std::size_t rows, std::size_t cols, std::size_t expect_rows) {
  if (cols != 3 || rows != expect_rows)
    throw ad::ShapeError(std::string(what) + ": expected (" + std::to_string(expect_rows) + ", 3), got (" +
                         std::to_string(rows) + ", " + std::to_string(cols) + ")");
}

}  // namespace

void LossWeights::validate() const {
  for (double w : {shading, mask, laplacian, normal, feature, gamma})
    if (!(w >= 0) || !std::isfinite(w)) throw std::invalid_argument("loss weights must be finite and non-negative");
}

std::size_t empty_sample_count() { return g_empty_samples.load(); }
void reset_empty_sample_count() { g_empty_samples = 0; }

template <typename T>
ad::Tensor<T> shading_loss(const ad::Tensor<T>& rendered, const ad::Tensor<T>& target) {
  if (rendered.shape() != target.shape()) throw ad::ShapeError("shading_loss: shape mismatch");
  if (rendered.size() == 0) {
    ++g_empty_samples;
    return ad::Tensor<T>::scalar(T(0));
  }
  return ad::mean(ad::abs(ad::sub(rendered, target)));
}

template <typename T>
ad::Tensor<T> shading_loss(const ad::Tensor<T>& rendered, const ad::Tensor<T>& target,
                           std::span<const std::uint32_t> sample_idx) {
  if (rendered.shape() != target.shape()) throw ad::ShapeError("shading_loss: shape mismatch");
  if (sample_idx.empty()) {
    ++g_empty_samples;
    return ad::Tensor<T>::scalar(T(0));
  }
  return shading_loss(ad::gather(rendered, sample_idx), ad::gather(target, sample_idx));
}

template <typename T>
ad::Tensor<T> mask_loss(const ad::Tensor<T>& soft_mask, const ad::Tensor<T>& target_mask) {
  if (soft_mask.shape() != target_mask.shape() || soft_mask.size() == 0)
    throw ad::ShapeError("mask_loss: masks must be non-empty and the same size");
  return ad::mean(ad::abs(ad::sub(soft_mask, target_mask)));
}

template <typename T>
ad::Tensor<T> laplacian_loss(const ad::Tensor<T>& positions, const ad::CsrMatrix& laplacian) {
  if (positions.rank() != 2 || positions.cols() != 3 || positions.rows() != laplacian.rows)
    throw ad::ShapeError("laplacian_loss: positions do not match the Laplacian");
  return mean_over(ad::square(ad::sparse_matmul(laplacian, positions)), positions.rows());
}

template <typename T>
ad::Tensor<T> normal_consistency_loss(const ad::Tensor<T>& positions, const mesh::FaceCorners& corners,
                                      const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs,
                                      NormalConsistencyInfo* info) {
  const auto cr = mesh::face_cross(positions, corners);
  const auto cv = cr.data();
  auto degenerate = [&](std::uint32_t f) {
    const double x = cv[f * 3], y = cv[f * 3 + 1], z = cv[f * 3 + 2];
    return !(std::sqrt(x * x + y * y + z * z) > 1e-12);
  };
  std::vector<std::uint32_t> a, b;
  a.reserve(pairs.size());
  b.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    if (degenerate(i) || degenerate(j)) continue;
    a.push_back(i);
    b.push_back(j);
  }
  if (info) {
    info->pairs_used = a.size();
    info->pairs_skipped = pairs.size() - a.size();
  }
  if (a.empty()) return ad::Tensor<T>::scalar(T(0));
  const auto n = ad::l2_normalize(cr);
  const auto d = ad::dot(ad::gather(n, a), ad::gather(n, b));
  return mean_over(ad::square(ad::add_scalar(ad::scale(d, T(-1)), T(1))), a.size());
}

template <typename T>
ad::Tensor<T> feature_reg_loss(const ad::Tensor<T>& predicted, const ad::Tensor<T>& raster_normals,
                               const ad::Tensor<T>& view_dirs) {
  const std::size_t P = predicted.rows();
  check_rows3("feature_reg_loss predicted", predicted.rows(), predicted.cols(), P);
  check_rows3("feature_reg_loss raster normals", raster_normals.rows(), raster_normals.cols(), P);
  check_rows3("feature_reg_loss view dirs", view_dirs.rows(), view_dirs.cols(), P);
  if (P == 0) return ad::Tensor<T>::scalar(T(0));
  const auto mse = ad::scale(ad::sum(ad::square(ad::sub(raster_normals, predicted))), static_cast<T>(1.0 / (3.0 * P)));
  const auto facing = mean_over(ad::square(ad::min_zero(ad::dot(predicted, view_dirs))), P);
  return ad::add(mse, facing);
}

template <typename T>
ad::Tensor<T> total_loss(const LossTerms<T>& t, const LossWeights& weights, bool boosted) {
  const LossWeights w = boosted ? weights.boosted() : weights;
  ad::Tensor<T> total = ad::Tensor<T>::scalar(T(0));
  auto term = [&](const ad::Tensor<T>& x, double lambda) {
    if (!x.defined()) return;
    if (x.size() != 1) throw ad::ShapeError("total_loss: terms must be scalars");
    total = ad::add(total, ad::scale(x, static_cast<T>(lambda)));
  };
  term(t.shading, w.shading);
  term(t.mask, w.mask);
  term(t.laplacian, w.laplacian);
  term(t.normal, w.normal);
  term(t.feature, w.feature);
  return total;
}

#define NMR_LOSSES_INSTANTIATE(T)                                                                              \
  template ad::Tensor<T> shading_loss(const ad::Tensor<T>&, const ad::Tensor<T>&);                             \
  template ad::Tensor<T> shading_loss(const ad::Tensor<T>&, const ad::Tensor<T>&, std::span<const std::uint32_t>); \
  template ad::Tensor<T> mask_loss(const ad::Tensor<T>&, const ad::Tensor<T>&);                                \
  template ad::Tensor<T> laplacian_loss(const ad::Tensor<T>&, const ad::CsrMatrix&);                           \
  template ad::Tensor<T> normal_consistency_loss(const ad::Tensor<T>&, const mesh::FaceCorners&,               \
                                                 const std::vector<std::pair<std::uint32_t, std::uint32_t>>&,  \
                                                 NormalConsistencyInfo*);                                      \
  template ad::Tensor<T> feature_reg_loss(const ad::Tensor<T>&, const ad::Tensor<T>&, const ad::Tensor<T>&);   \
  template ad::Tensor<T> total_loss(const LossTerms<T>&, const LossWeights&, bool);

NMR_LOSSES_INSTANTIATE(float)
NMR_LOSSES_INSTANTIATE(double)
#undef NMR_LOSSES_INSTANTIATE

}  // namespace nmr::losses
