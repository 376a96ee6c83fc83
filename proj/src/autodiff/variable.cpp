#include "latefuse/autodiff/variable.hpp"

#include <unordered_set>

#include "latefuse/common/error.hpp"

namespace latefuse::ad {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

void Node::accumulate(const Tensor& g) {
  if (!requires_grad) return;
  if (g.shape() != value.shape()) {
    throw ShapeError("gradient shape " + shape_str(g.shape()) + " does not match value shape " +
                     shape_str(value.shape()));
  }
  if (grad.empty()) {
    grad = g;
    return;
  }
  auto dst = grad.data();
  auto src = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

Variable::Variable(Tensor value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Tensor Variable::grad() const {
  if (node_->grad.empty()) return Tensor(node_->value.shape());
  return node_->grad;
}

void Variable::zero_grad() { node_->grad = Tensor(); }

void Variable::set_value(Tensor value) {
  if (value.shape() != node_->value.shape()) {
    throw ShapeError("set_value: shape " + shape_str(value.shape()) + " != " +
                     shape_str(node_->value.shape()));
  }
  node_->value = std::move(value);
}

Tensor& Variable::mutable_value() { return node_->value; }

Variable Variable::make(Tensor value, std::vector<Variable> parents,
                        std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  bool any = false;
  for (const auto& p : parents) any = any || p.requires_grad();
  if (g_grad_enabled && any) {
    node->requires_grad = true;
    node->is_leaf = false;
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(p.node_);
    node->backward = std::move(backward);
  }
  return Variable(std::move(node));
}

void backward(const Variable& loss) {
  if (!loss.defined()) throw Error("backward: undefined loss");
  if (loss.numel() != 1) {
    throw ShapeError("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
  }
  Node* root = loss.node().get();
  if (root->consumed) throw Error("backward: graph already consumed");
  if (!root->requires_grad) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{root, 0}};
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next_parent] = stack.back();
    if (next_parent < node->parents.size()) {
      Node* p = node->parents[next_parent++].get();
      if (p->requires_grad && !p->is_leaf && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->accumulate(Tensor(root->value.shape(), 1.0));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }
  for (Node* node : order) {
    node->backward = nullptr;
    node->parents.clear();
    node->grad = Tensor();
    node->consumed = true;
  }
}

}  // namespace latefuse::ad
