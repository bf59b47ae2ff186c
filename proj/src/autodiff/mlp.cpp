#include "anmvae/autodiff/mlp.hpp"

#include <cmath>
#include <string>

#include "anmvae/autodiff/ops.hpp"
#include "anmvae/errors.hpp"

namespace anmvae::ad {

MlpParams MlpParams::zeros(std::span<const std::size_t> widths) {
  if (widths.size() < 2) {
    throw ConfigError("an MLP needs at least an input and an output width");
  }
  MlpParams p;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    p.layers.push_back({Tensor({widths[i], widths[i + 1]}), Tensor({widths[i + 1]})});
  }
  return p;
}

MlpParams MlpParams::init(std::span<const std::size_t> widths, Rng& rng) {
  MlpParams p = zeros(widths);
  for (DenseLayer& layer : p.layers) {
    const double fan_in = static_cast<double>(layer.weight.rows());
    const double fan_out = static_cast<double>(layer.weight.cols());
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (float& w : layer.weight.data()) {
      w = static_cast<float>(dist(rng));
    }
  }
  return p;
}

std::size_t MlpParams::input_width() const {
  return layers.empty() ? 0 : layers.front().weight.rows();
}

std::size_t MlpParams::output_width() const {
  return layers.empty() ? 0 : layers.back().weight.cols();
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers) {
    n += l.weight.size() + l.bias.size();
  }
  return n;
}

std::vector<std::size_t> MlpParams::widths() const {
  std::vector<std::size_t> w;
  if (layers.empty()) {
    return w;
  }
  w.push_back(input_width());
  for (const DenseLayer& l : layers) {
    w.push_back(l.weight.cols());
  }
  return w;
}

std::vector<Tensor*> MlpParams::tensors() {
  std::vector<Tensor*> out;
  for (DenseLayer& l : layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Tensor*> MlpParams::tensors() const {
  std::vector<const Tensor*> out;
  for (const DenseLayer& l : layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<std::size_t> standard_widths(std::size_t in, std::size_t out, std::size_t hidden) {
  return {in, hidden, hidden, hidden, out};
}

BoundMlp::BoundMlp(Graph& graph, const MlpParams& params) : graph_(&graph), params_(&params) {
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const DenseLayer& l = params.layers[i];
    if (i > 0 && l.weight.rows() != params.layers[i - 1].weight.cols()) {
      throw ConfigError("MLP layer " + std::to_string(i) + " does not chain with its predecessor");
    }
    weights_.push_back(graph.parameter(l.weight));
    biases_.push_back(graph.parameter(l.bias));
  }
}

Var BoundMlp::forward(Var input) const {
  const Tensor& x = graph_->value(input);
  const std::size_t width = x.rank() == 0 ? 1 : x.shape().back();
  if (width != params_->input_width()) {
    throw ConfigError("MLP input width " + std::to_string(width) + " does not match first layer " +
                      std::to_string(params_->input_width()));
  }
  Var h = x.rank() == 2 ? input : reshape(input, {1, width});
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    h = linear(h, weights_[i], biases_[i]);
    if (i + 1 < weights_.size()) {
      h = relu(h);
    }
  }
  return h;
}

std::vector<Tensor> BoundMlp::gradients() const {
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    out.push_back(graph_->grad(weights_[i]));
    out.push_back(graph_->grad(biases_[i]));
  }
  return out;
}

Var mlp_forward(const MlpParams& params, Var input, Graph& graph) {
  return BoundMlp(graph, params).forward(input);
}

}  // namespace anmvae::ad
