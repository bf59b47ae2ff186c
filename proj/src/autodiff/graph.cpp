#include "anmvae/autodiff/graph.hpp"

#include <string>

#include "anmvae/errors.hpp"

namespace anmvae::ad {

const Tensor& Var::value() const { return graph->value(id); }
const Tensor& Var::grad() const { return graph->grad(*this); }

Var Graph::constant(Tensor value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Graph::variable(Tensor value) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Graph::parameter(const Tensor& storage) {
  Node n;
  n.external = &storage;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Graph::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn) {
  Node n;
  n.owned = std::move(value);
  for (std::size_t in : inputs) {
    if (in >= nodes_.size()) {
      throw ConfigError("graph input " + std::to_string(in) + " does not precede its consumer");
    }
    n.requires_grad = n.requires_grad || nodes_[in].requires_grad;
  }
  n.inputs = std::move(inputs);
  if (n.requires_grad) {
    n.backward = std::move(fn);
  }
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

const Tensor& Graph::value(std::size_t id) const {
  const Node& n = nodes_.at(id);
  return n.external != nullptr ? *n.external : n.owned;
}

const Tensor& Graph::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (n.has_grad) {
    return n.grad;
  }
  zero_grads_.push_back(std::make_unique<Tensor>(value(v.id).shape()));
  return *zero_grads_.back();
}

Tensor& Graph::grad_slot(std::size_t id) {
  Node& n = nodes_.at(id);
  if (!n.has_grad) {
    n.grad = Tensor(value(id).shape());
    n.has_grad = true;
  }
  return n.grad;
}

void Graph::accumulate(std::size_t id, const Tensor& g) {
  if (!nodes_.at(id).requires_grad) {
    return;
  }
  Tensor& slot = grad_slot(id);
  if (slot.size() != g.size()) {
    throw ConfigError("gradient size mismatch on node " + std::to_string(id));
  }
  float* dst = slot.raw();
  const float* src = g.raw();
  for (std::size_t i = 0; i < g.size(); ++i) {
    dst[i] += src[i];
  }
}

void Graph::backward(Var loss) {
  if (value(loss.id).size() != 1) {
    throw ConfigError("backward() requires a scalar loss");
  }
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  zero_grads_.clear();
  grad_slot(loss.id).fill(1.0f);
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.backward) {
      continue;
    }
    n.backward(*this, n.grad);
  }
}

}  // namespace anmvae::ad
