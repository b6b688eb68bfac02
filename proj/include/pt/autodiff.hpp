#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pt/tensor.hpp"

namespace pt {
inline namespace PT_REAL_NS {

// A named, persistent learnable tensor and its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

struct Node {
  Tensor own_value;
  Tensor own_grad;
  // Leaf nodes bound to a Parameter read its value in place and accumulate
  // directly into its gradient.
  const Tensor* external_value = nullptr;
  Tensor* external_grad = nullptr;
  bool requires_grad = false;
  std::function<void()> backward;

  const Tensor& value() const {
    return external_value ? *external_value : own_value;
  }
  bool has_grad() const;
  // Gradient buffer, zero-initialised on first access.
  Tensor& grad();
};

class Graph;

// Lightweight handle to a node owned by a Graph. Cheap to copy; invalid once
// the owning Graph is destroyed.
class Var {
 public:
  Var() = default;

  const Tensor& value() const { return node_->value(); }
  const Shape& shape() const { return node_->value().shape(); }
  Real item() const { return node_->value()[0]; }
  bool requires_grad() const { return node_->requires_grad; }
  Node* node() const { return node_; }
  Graph& graph() const { return *graph_; }
  bool valid() const { return node_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph* graph, Node* node) : graph_(graph), node_(node) {}

  Graph* graph_ = nullptr;
  Node* node_ = nullptr;
};

// Tape of operation records in creation (hence topological) order. One Graph
// per forward/backward pass; it is not shared between threads.
class Graph {
 public:
  // With `track_gradients` false, parameters are bound as plain constants and
  // no backward rules are recorded (inference).
  explicit Graph(bool track_gradients = true) : track_(track_gradients) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  Var parameter(Parameter& param);
  // Read-only binding; only valid on a graph that does not track gradients.
  Var parameter(const Parameter& param);

  // Records an op result. The result requires grad iff any input does; ops
  // attach `node()->backward` only in that case.
  Var record(Tensor value, std::initializer_list<Var> inputs);
  Var record(Tensor value, std::span<const Var> inputs);

  // Seeds d(loss)/d(loss) = 1 and runs every backward rule in reverse
  // creation order. Returns the number of rules executed.
  std::size_t backward(const Var& loss);

  std::size_t size() const { return nodes_.size(); }
  bool tracking() const { return track_; }

 private:
  bool track_;
  std::vector<std::unique_ptr<Node>> nodes_;
};

}  // namespace PT_REAL_NS
}  // namespace pt
