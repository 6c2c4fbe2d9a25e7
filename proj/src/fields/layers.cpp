#include "nmr/fields/layers.hpp"

#include <cmath>

#include "nmr/autodiff/ops.hpp"

namespace nmr::fields {

template <typename T>
Linear<T>::Linear(std::size_t in, std::size_t out, Init init, std::mt19937_64& rng)
    : in_(in), out_(out) {
  std::vector<T> w(in * out, T(0));
  if (init != Init::Zero) {
    // Kaiming-uniform keeps ReLU activations at unit scale; heads start smaller.
    const double bound = init == Init::KaimingUniform ? std::sqrt(6.0 / double(in)) : std::sqrt(1.0 / double(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (auto& v : w) v = static_cast<T>(u(rng));
  }
  weight = ad::Tensor<T>({in, out}, std::move(w), true);
  bias = ad::Tensor<T>::zeros({out}, true);
}

template <typename T>
ad::Tensor<T> Linear<T>::operator()(const ad::Tensor<T>& x) const {
  return ad::add(ad::matmul(x, weight), bias);
}

template <typename T>
void Linear<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

template <typename T>
Mlp<T>::Mlp(const std::vector<std::size_t>& dims, Output out, std::mt19937_64& rng, Init last_init)
    : out_(out) {
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const bool last = i + 2 == dims.size();
    layers_.emplace_back(dims[i], dims[i + 1], last ? last_init : Init::KaimingUniform, rng);
  }
}

template <typename T>
ad::Tensor<T> Mlp<T>::operator()(const ad::Tensor<T>& x) const {
  ad::Tensor<T> h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i](h);
    if (i + 1 < layers_.size()) h = ad::relu(h);
  }
  return out_ == Output::Sigmoid ? ad::sigmoid(h) : h;
}

template <typename T>
void Mlp<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i].collect(prefix + "." + std::to_string(i), out);
}

template class Linear<float>;
template class Linear<double>;
template class Mlp<float>;
template class Mlp<double>;

}  // namespace nmr::fields
