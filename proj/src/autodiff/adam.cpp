#include "nmr/autodiff/adam.hpp"

#include <cmath>

#include "nmr/kernels/parallel.hpp"

namespace nmr::ad {

template <typename T>
Adam<T>::Adam(std::vector<Tensor<T>> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p.size(), T(0));
    v_.emplace_back(p.size(), T(0));
  }
}

template <typename T>
void Adam<T>::step(double lr) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i].has_grad()) {
      throw TapeError("adam: parameter " + std::to_string(i) + " of shape " +
                      to_string(params_[i].shape()) + " has no gradient");
    }
  }
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const T step_size = static_cast<T>(lr / c1);
  const T inv_c2 = static_cast<T>(1.0 / c2);
  const T eps = static_cast<T>(options_.eps);
  const T tb1 = static_cast<T>(b1), tb2 = static_cast<T>(b2);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    auto value = p.mutable_data();
    auto grad = p.mutable_grad();
    auto& m = m_[i];
    auto& v = v_[i];
    kernels::parallel_for(value.size(), [&](std::size_t k) {
      const T g = grad[k];
      m[k] = tb1 * m[k] + (T(1) - tb1) * g;
      v[k] = tb2 * v[k] + (T(1) - tb2) * g * g;
      value[k] -= step_size * m[k] / (std::sqrt(v[k] * inv_c2) + eps);
      grad[k] = T(0);
    });
  }
}

template <typename T>
void Adam<T>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

template <typename T>
void Adam<T>::rebind(std::size_t i, Tensor<T> param) {
  params_.at(i) = std::move(param);
  m_[i].assign(params_[i].size(), T(0));
  v_[i].assign(params_[i].size(), T(0));
}

template class Adam<float>;
template class Adam<double>;

}  // namespace nmr::ad
