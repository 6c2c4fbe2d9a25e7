#pragma once

#include <cstddef>

#include "nmr/autodiff/tensor.hpp"

namespace nmr::enc {

/// Bands 0..kShDegree-1 of the real spherical harmonics.  Set to 3 to keep
/// bands 0..2 only (9 values).
inline constexpr int kShDegree = 4;
inline constexpr std::size_t kShDim = kShDegree * kShDegree;

/// (n, 3) unit directions -> (n, kShDim) real SH basis values, differentiable
/// w.r.t. the directions.  Rows further than 1e-4 from unit length are
/// normalized first and counted in sh_warning_count().
template <typename T>
ad::Tensor<T> sh_encode(const ad::Tensor<T>& dirs);

std::size_t sh_warning_count();
void reset_sh_warning_count();

}  // namespace nmr::enc
