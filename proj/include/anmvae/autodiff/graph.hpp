#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <vector>

#include "anmvae/autodiff/tensor.hpp"

namespace anmvae::ad {

class Graph;

/// Handle to a node on a Graph tape.
struct Var {
  Graph* graph = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Tensor& grad() const;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so the node
/// list is already topologically sorted; backward walks it in reverse.
///
/// The graph is rebuilt for every minibatch. Parameters are referenced, not
/// copied, and must outlive the graph.
class Graph {
 public:
  /// Backward rule: receives the gradient of the loss w.r.t. this node's
  /// output and accumulates into its inputs via `accumulate`.
  using BackwardFn = std::function<void(Graph&, const Tensor& out_grad)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Leaf that never receives a gradient.
  Var constant(Tensor value);
  /// Leaf that receives a gradient and owns its value.
  Var variable(Tensor value);
  /// Leaf that receives a gradient and views external storage.
  Var parameter(const Tensor& storage);

  /// Append an op result. `fn` may be empty when no input requires grad.
  Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn);

  const Tensor& value(std::size_t id) const;
  const Tensor& value(Var v) const { return value(v.id); }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool requires_grad(Var v) const { return requires_grad(v.id); }

  /// Gradient of the last backward's loss w.r.t. `v`; zeros if unreached.
  const Tensor& grad(Var v) const;

  /// Add `g` into the gradient slot of node `id` (allocating on first use).
  void accumulate(std::size_t id, const Tensor& g);
  /// Mutable gradient slot, zero-initialised on first access.
  Tensor& grad_slot(std::size_t id);

  /// Reverse sweep from a scalar `loss`. Each node is visited once.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned;
    const Tensor* external = nullptr;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
  };

  // deque keeps value references stable while the tape grows
  std::deque<Node> nodes_;
  mutable std::vector<std::unique_ptr<Tensor>> zero_grads_;
};

}  // namespace anmvae::ad
