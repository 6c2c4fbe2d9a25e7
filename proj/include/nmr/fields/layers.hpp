#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "nmr/autodiff/tensor.hpp"

namespace nmr::fields {

/// A trainable tensor with its checkpoint name.
template <typename T>
struct NamedParam {
  std::string name;
  ad::Tensor<T> tensor;
};

template <typename T>
using ParamList = std::vector<NamedParam<T>>;

enum class Init { KaimingUniform, Small, Zero };

/// y = x W + b with W stored (in, out).
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(std::size_t in, std::size_t out, Init init, std::mt19937_64& rng);

  ad::Tensor<T> operator()(const ad::Tensor<T>& x) const;
  std::size_t in_dim() const { return in_; }
  std::size_t out_dim() const { return out_; }
  void collect(const std::string& prefix, ParamList<T>& out) const;

  ad::Tensor<T> weight;
  ad::Tensor<T> bias;

 private:
  std::size_t in_ = 0, out_ = 0;
};

enum class Output { Linear, Sigmoid };

/// Plain ReLU MLP: dims = {in, hidden..., out}.
template <typename T>
class Mlp {
 public:
  Mlp() = default;
  Mlp(const std::vector<std::size_t>& dims, Output out, std::mt19937_64& rng,
      Init last_init = Init::Small);

  ad::Tensor<T> operator()(const ad::Tensor<T>& x) const;
  std::size_t in_dim() const { return layers_.front().in_dim(); }
  std::size_t out_dim() const { return layers_.back().out_dim(); }
  bool defined() const { return !layers_.empty(); }
  void collect(const std::string& prefix, ParamList<T>& out) const;
  std::vector<Linear<T>>& layers() { return layers_; }

 private:
  std::vector<Linear<T>> layers_;
  Output out_ = Output::Linear;
};

}  // namespace nmr::fields
