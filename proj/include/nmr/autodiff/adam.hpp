#pragma once

#include <cstdint>
#include <vector>

#include "nmr/autodiff/tensor.hpp"

namespace nmr::ad {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction over a fixed parameter list.  Moments are kept
/// per parameter and must match its shape; rebind() resets them when a
/// parameter is replaced (e.g. after mesh upsampling).
template <typename T>
class Adam {
 public:
  explicit Adam(std::vector<Tensor<T>> params, AdamOptions options = {});

  /// Applies one update with learning rate `lr` and zeroes the gradients.
  /// Throws TapeError if any parameter has no gradient.
  void step(double lr);
  void zero_grad();

  /// Replaces parameter `i` and clears its moments.
  void rebind(std::size_t i, Tensor<T> param);

  std::uint64_t steps() const { return step_; }
  const std::vector<Tensor<T>>& params() const { return params_; }
  const std::vector<T>& first_moment(std::size_t i) const { return m_[i]; }
  const std::vector<T>& second_moment(std::size_t i) const { return v_[i]; }
  const AdamOptions& options() const { return options_; }

 private:
  std::vector<Tensor<T>> params_;
  std::vector<std::vector<T>> m_;
  std::vector<std::vector<T>> v_;
  AdamOptions options_;
  std::uint64_t step_ = 0;
};

}  // namespace nmr::ad
