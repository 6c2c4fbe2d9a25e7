#include "nmr/autodiff/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "nmr/autodiff/custom_op.hpp"

namespace nmr::ad {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  if (shape.size() == 1) os << ',';
  os << ')';
  return os.str();
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data, bool requires_grad)
    : node_(std::make_shared<Node<T>>()) {
  if (numel(shape) != data.size()) {
    throw ShapeError("tensor: shape " + to_string(shape) + " does not match " +
                     std::to_string(data.size()) + " values");
  }
  node_->shape = std::move(shape);
  node_->value = std::move(data);
  node_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  const auto n = numel(shape);
  return Tensor(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return Tensor(Shape{}, std::vector<T>{value}, requires_grad);
}

template <typename T>
std::size_t Tensor<T>::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw ShapeError("tensor: axis " + std::to_string(axis) + " out of range for shape " +
                     to_string(shape()));
  }
  return node_->shape[axis];
}

template <typename T>
std::size_t Tensor<T>::rows() const {
  if (rank() == 0 || rank() == 1) return 1;
  return node_->shape.front();
}

template <typename T>
std::size_t Tensor<T>::cols() const {
  if (rank() == 0) return 1;
  return node_->shape.back();
}

template <typename T>
T Tensor<T>::item() const {
  if (size() != 1) {
    throw ShapeError("item: tensor of shape " + to_string(shape()) + " is not a scalar");
  }
  return node_->value.front();
}

template <typename T>
void Tensor<T>::zero_grad() {
  node_->grad.assign(node_->value.size(), T(0));
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return Tensor(node_->shape, node_->value, false);
}

template <typename T>
Tape<T>*& Tape<T>::active_slot() {
  static thread_local Tape<T>* slot = nullptr;
  return slot;
}

template <typename T>
Tape<T>* Tape<T>::active() {
  return active_slot();
}

template <typename T>
Tape<T>::Scope::Scope(Tape& tape) : previous_(active_slot()) {
  active_slot() = &tape;
}

template <typename T>
Tape<T>::Scope::~Scope() {
  active_slot() = previous_;
}

template <typename T>
void Tape<T>::backward(const Tensor<T>& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw TapeError("backward: loss must be a scalar, got shape " +
                    (loss.defined() ? to_string(loss.shape()) : std::string("<undefined>")));
  }
  if (records_.empty()) {
    throw TapeError("backward: tape is empty (already replayed or nothing recorded)");
  }
  auto& root = *loss.node();
  root.ensure_grad();
  root.grad[0] += T(1);
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    if (it->output->grad.empty()) continue;  // not on a path to the loss
    it->backward(*it->output);
    // Intermediate gradients are not needed once propagated.
    if (!it->output->is_leaf && it->output.get() != loss.node().get()) {
      it->output->grad.clear();
      it->output->grad.shrink_to_fit();
    }
  }
  records_.clear();
}

template <typename T>
void accumulate_grad(Node<T>& node, std::span<const T> g) {
  if (!node.requires_grad) return;
  node.ensure_grad();
  for (std::size_t i = 0; i < g.size(); ++i) node.grad[i] += g[i];
}

template <typename T>
Tensor<T> record_op(std::string op, Shape shape, std::vector<T> value,
                    std::vector<Tensor<T>> inputs, typename Tape<T>::BackwardFn backward) {
  auto out = std::make_shared<Node<T>>();
  out->shape = std::move(shape);
  out->value = std::move(value);
  Tape<T>* tape = Tape<T>::active();
  const bool track =
      tape && std::any_of(inputs.begin(), inputs.end(),
                          [](const Tensor<T>& t) { return t.requires_grad(); });
  if (track) {
    out->requires_grad = true;
    out->is_leaf = false;
    typename Tape<T>::Record r;
    r.op = std::move(op);
    r.inputs.reserve(inputs.size());
    for (auto& t : inputs) r.inputs.push_back(t.node());
    r.output = out;
    r.backward = std::move(backward);
    tape->record(std::move(r));
  }
  return make_from_node(std::move(out));
}

template <typename T>
CustomOp<T>::CustomOp(std::string name, CustomForward<T> forward, CustomBackward<T> backward)
    : name_(std::move(name)), forward_(std::move(forward)), backward_(std::move(backward)) {}

template <typename T>
Tensor<T> CustomOp<T>::operator()(std::vector<Tensor<T>> inputs) const {
  auto value = forward_(std::span<const Tensor<T>>(inputs));
  if (numel(value.shape) != value.data.size()) {
    throw ShapeError("custom op '" + name_ + "': forward produced shape " +
                     to_string(value.shape) + " with " + std::to_string(value.data.size()) +
                     " values");
  }
  auto captured = inputs;
  auto backward = backward_;
  auto name = name_;
  return record_op<T>(
      name_, std::move(value.shape), std::move(value.data), std::move(inputs),
      [captured, backward, name](const Node<T>& out) {
        auto cot = backward(std::span<const Tensor<T>>(captured), out.value, out.grad);
        if (cot.size() != captured.size()) {
          throw ShapeError("custom op '" + name + "': backward returned " +
                           std::to_string(cot.size()) + " cotangents for " +
                           std::to_string(captured.size()) + " inputs");
        }
        for (std::size_t i = 0; i < cot.size(); ++i) {
          if (cot[i].empty()) continue;
          if (cot[i].size() != captured[i].size()) {
            throw ShapeError("custom op '" + name + "': cotangent " + std::to_string(i) +
                             " has " + std::to_string(cot[i].size()) +
                             " values, input shape is " + to_string(captured[i].shape()));
          }
          accumulate_grad<T>(*captured[i].node(), cot[i]);
        }
      });
}

template class Tensor<float>;
template class Tensor<double>;
template class Tape<float>;
template class Tape<double>;
template class CustomOp<float>;
template class CustomOp<double>;
template void accumulate_grad<float>(Node<float>&, std::span<const float>);
template void accumulate_grad<double>(Node<double>&, std::span<const double>);
template Tensor<float> record_op<float>(std::string, Shape, std::vector<float>,
                                        std::vector<Tensor<float>>, Tape<float>::BackwardFn);
template Tensor<double> record_op<double>(std::string, Shape, std::vector<double>,
                                          std::vector<Tensor<double>>, Tape<double>::BackwardFn);

}  // namespace nmr::ad
