#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nmr::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

/// Raised when operand shapes are incompatible with an operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised on misuse of the tape (backward on a non-scalar, double backward, ...).
class TapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // empty until the first gradient lands here
  bool requires_grad = false;
  bool is_leaf = true;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
  }
};

/// Dense row-major tensor handle.  Copies share storage (like a parameter
/// handle); use clone() or detach() for an independent value.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  Tensor(Shape shape, std::vector<T> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->value.size(); }
  std::size_t dim(std::size_t axis) const;
  /// First axis of a rank-2 tensor (1 for rank 1).
  std::size_t rows() const;
  /// Last axis.
  std::size_t cols() const;

  std::span<const T> data() const { return node_->value; }
  std::span<T> mutable_data() { return node_->value; }
  T item() const;
  T at(std::size_t i) const { return node_->value[i]; }

  bool requires_grad() const { return node_ && node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  bool is_leaf() const { return node_->is_leaf; }

  bool has_grad() const { return node_ && node_->grad.size() == node_->value.size(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  /// Fills the gradient with zeros (allocating it if needed).
  void zero_grad();
  void clear_grad() { node_->grad.clear(); }

  /// New leaf with a copy of the value and no gradient history.
  Tensor detach() const;
  Tensor clone() const { return detach(); }

  const std::shared_ptr<Node<T>>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}
  template <typename U>
  friend class Tape;
  template <typename U>
  friend Tensor<U> make_from_node(std::shared_ptr<Node<U>> node);

  std::shared_ptr<Node<T>> node_;
};

template <typename T>
Tensor<T> make_from_node(std::shared_ptr<Node<T>> node) {
  return Tensor<T>(std::move(node));
}

/// Ordered record of operations for reverse-mode differentiation.
///
/// Operations record onto the tape that is active on the calling thread (see
/// Tape::Scope).  Records are appended in execution order, so each record's
/// inputs were produced by earlier records or are leaves.  backward() replays
/// the records once, newest first, and then clears the tape; a second call
/// without re-recording throws.
template <typename T>
class Tape {
 public:
  using NodePtr = std::shared_ptr<Node<T>>;
  using BackwardFn = std::function<void(const Node<T>& output)>;

  struct Record {
    std::string op;
    std::vector<NodePtr> inputs;
    NodePtr output;
    BackwardFn backward;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(Record r) { records_.push_back(std::move(r)); }
  void backward(const Tensor<T>& loss);
  void clear() { records_.clear(); }

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<Record>& records() const { return records_; }

  static Tape* active();

  /// Makes a tape active on this thread for the lifetime of the scope.
  class Scope {
   public:
    explicit Scope(Tape& tape);
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Tape* previous_;
  };

 private:
  static Tape*& active_slot();
  std::vector<Record> records_;
};

/// Records an operation when a tape is active and any input requires a
/// gradient.  The output node is created from (shape, value); `backward`
/// receives the output node (whose grad is populated) and must accumulate
/// into the inputs' grads.
template <typename T>
Tensor<T> record_op(std::string op, Shape shape, std::vector<T> value,
                    std::vector<Tensor<T>> inputs, typename Tape<T>::BackwardFn backward);

/// Adds `g` into `node`'s gradient if it requires one.
template <typename T>
void accumulate_grad(Node<T>& node, std::span<const T> g);

}  // namespace nmr::ad
