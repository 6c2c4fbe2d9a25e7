#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nmr/autodiff/tensor.hpp"

namespace nmr::ad {

template <typename T>
struct CustomValue {
  Shape shape;
  std::vector<T> data;
};

template <typename T>
using CustomForward = std::function<CustomValue<T>(std::span<const Tensor<T>> inputs)>;

/// Returns one cotangent per input, each either empty (no contribution) or of
/// the input's size.
template <typename T>
using CustomBackward = std::function<std::vector<std::vector<T>>(
    std::span<const Tensor<T>> inputs, std::span<const T> out_value,
    std::span<const T> out_grad)>;

/// A user-supplied differentiable operation.  Calls record on the active tape
/// exactly like the built-in ops; a backward that returns cotangents of the
/// wrong count or size raises ShapeError when first replayed.
template <typename T>
class CustomOp {
 public:
  CustomOp(std::string name, CustomForward<T> forward, CustomBackward<T> backward);

  Tensor<T> operator()(std::vector<Tensor<T>> inputs) const;
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  CustomForward<T> forward_;
  CustomBackward<T> backward_;
};

template <typename T>
CustomOp<T> register_custom_op(std::string name, CustomForward<T> forward,
                               CustomBackward<T> backward) {
  return CustomOp<T>(std::move(name), std::move(forward), std::move(backward));
}

}  // namespace nmr::ad
