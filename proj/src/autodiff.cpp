#include "pt/autodiff.hpp"

#include "pt/errors.hpp"

namespace pt {
inline namespace PT_REAL_NS {

bool Node::has_grad() const {
  return external_grad ? true : !own_grad.empty();
}

Tensor& Node::grad() {
  if (external_grad) {
    if (external_grad->shape() != value().shape()) {
      *external_grad = Tensor::zeros_like(value());
    }
    return *external_grad;
  }
  if (own_grad.empty()) own_grad = Tensor::zeros_like(value());
  return own_grad;
}

Var Graph::constant(Tensor value) {
  auto node = std::make_unique<Node>();
  node->own_value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.back().get());
}

Var Graph::parameter(Parameter& param) {
  auto node = std::make_unique<Node>();
  node->external_value = &param.value;
  if (track_) {
    node->external_grad = &param.grad;
    node->requires_grad = true;
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.back().get());
}

Var Graph::parameter(const Parameter& param) {
  if (track_) {
    throw ContractViolation("read-only parameter '" + param.name +
                            "' bound to a gradient-tracking graph");
  }
  auto node = std::make_unique<Node>();
  node->external_value = &param.value;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.back().get());
}

Var Graph::record(Tensor value, std::initializer_list<Var> inputs) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()));
}

Var Graph::record(Tensor value, std::span<const Var> inputs) {
  auto node = std::make_unique<Node>();
  node->own_value = std::move(value);
  if (track_) {
    for (const Var& in : inputs) {
      if (in.requires_grad()) {
        node->requires_grad = true;
        break;
      }
    }
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.back().get());
}

std::size_t Graph::backward(const Var& loss) {
  if (loss.node() == nullptr || loss.value().size() != 1) {
    throw ContractViolation("backward() needs a scalar loss");
  }
  Node* root = loss.node();
  root->grad()[0] += Real(1);
  std::size_t executed = 0;
  bool seen_root = false;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node* n = it->get();
    if (n == root) seen_root = true;
    if (!seen_root) continue;  // created after the loss; cannot contribute
    if (n->backward && !n->own_grad.empty()) {
      n->backward();
      ++executed;
    }
  }
  return executed;
}

}  // namespace PT_REAL_NS
}  // namespace pt
