#pragma once

#include <span>
#include <utility>
#include <vector>

#include "nmr/autodiff/ops.hpp"
#include "nmr/mesh/tensor_ops.hpp"

namespace nmr::losses {

struct LossWeights {
  double shading = 1.0;
  double mask = 2.0;
  double laplacian = 40.0;
  double normal = 0.01;
  double feature = 0.1;
  double gamma = 64.0;  // multiplies the three regularizers after upsampling

  /// Throws std::invalid_argument for a negative or non-finite weight.
  void validate() const;
  /// The weights in effect once the regularizers have been boosted by gamma.
  LossWeights boosted() const {
    LossWeights w = *this;
    w.laplacian *= gamma;
    w.normal *= gamma;
    w.feature *= gamma;
    return w;
  }
};

/// Mean L1 over rows and channels of (P, 3) tensors.  An empty sample set
/// yields 0 and increments the empty-sample counter.
template <typename T>
ad::Tensor<T> shading_loss(const ad::Tensor<T>& rendered, const ad::Tensor<T>& target);

/// Same, on the listed rows of two full-frame images.
template <typename T>
ad::Tensor<T> shading_loss(const ad::Tensor<T>& rendered, const ad::Tensor<T>& target,
                           std::span<const std::uint32_t> sample_idx);

std::size_t empty_sample_count();
void reset_empty_sample_count();

/// Mean L1 over every pixel; shapes must match.
template <typename T>
ad::Tensor<T> mask_loss(const ad::Tensor<T>& soft_mask, const ad::Tensor<T>& target_mask);

/// (1/n) sum_i |L x_i|^2 for the uniform Laplacian L of the fixed topology.
template <typename T>
ad::Tensor<T> laplacian_loss(const ad::Tensor<T>& positions, const ad::CsrMatrix& laplacian);

struct NormalConsistencyInfo {
  std::size_t pairs_used = 0;
  std::size_t pairs_skipped = 0;  // a degenerate face in the pair
};

/// Mean over adjacent face pairs of (1 - N_i . N_j)^2.  Pairs with a
/// degenerate face (|cross| <= 1e-12) are skipped and counted.
template <typename T>
ad::Tensor<T> normal_consistency_loss(const ad::Tensor<T>& positions, const mesh::FaceCorners& corners,
                                      const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs,
                                      NormalConsistencyInfo* info = nullptr);

/// Mean over samples of mean_k (n - n')_k^2 + min(0, n' . v)^2, where n' are
/// the predicted normals, n the rasterized ones and v the view directions.
template <typename T>
ad::Tensor<T> feature_reg_loss(const ad::Tensor<T>& predicted, const ad::Tensor<T>& raster_normals,
                               const ad::Tensor<T>& view_dirs);

/// Individual terms; undefined tensors count as 0.
template <typename T>
struct LossTerms {
  ad::Tensor<T> shading, mask, laplacian, normal, feature;
};

/// Weighted sum; `boosted` applies gamma to the regularizer weights.
template <typename T>
ad::Tensor<T> total_loss(const LossTerms<T>& terms, const LossWeights& weights, bool boosted);

}  // namespace nmr::losses
