#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "latefuse/autodiff/tensor.hpp"

namespace latefuse::ad {

struct Node;
using NodePtr = std::shared_ptr<Node>;

/// One recorded value in the computation graph. Leaves carry no backward
/// function; interior nodes hold their parents and an adjoint rule that
/// reads `grad` and accumulates into the parents.
struct Node {
  Tensor value;
  Tensor grad;  // empty until something is accumulated
  bool requires_grad = false;
  bool is_leaf = true;
  bool consumed = false;
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backward;

  void accumulate(const Tensor& g);
};

/// Handle onto a graph node. Copies share the node.
class Variable {
 public:
  Variable() = default;
  explicit Variable(Tensor value, bool requires_grad = false);

  const Tensor& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t numel() const { return node_->value.numel(); }
  bool requires_grad() const { return node_->requires_grad; }
  bool defined() const { return static_cast<bool>(node_); }

  /// Accumulated gradient; a zero tensor of the value's shape if nothing
  /// has been accumulated.
  Tensor grad() const;
  void zero_grad();

  /// Overwrites a leaf's value (optimizer updates, checkpoint loads).
  void set_value(Tensor value);
  Tensor& mutable_value();

  const NodePtr& node() const { return node_; }

  /// Records an interior node. When gradient recording is disabled or no
  /// parent requires a gradient, the result is a constant leaf.
  static Variable make(Tensor value, std::vector<Variable> parents,
                       std::function<void(Node&)> backward);

 private:
  explicit Variable(NodePtr node) : node_(std::move(node)) {}
  NodePtr node_;
};

/// Reverse pass from a scalar loss. Visits each node once in reverse
/// topological order, sums adjoints into leaf gradients and then releases
/// the interior graph; a second call on the same loss throws.
void backward(const Variable& loss);

/// Disables graph recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

}  // namespace latefuse::ad
