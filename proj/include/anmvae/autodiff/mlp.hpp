#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "anmvae/autodiff/graph.hpp"
#include "anmvae/random.hpp"

namespace anmvae::ad {

struct DenseLayer {
  Tensor weight;  // [in, out]
  Tensor bias;    // [out]

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Fully connected network with ReLU between layers and a linear output.
struct MlpParams {
  std::vector<DenseLayer> layers;

  /// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static MlpParams init(std::span<const std::size_t> widths, Rng& rng);
  static MlpParams zeros(std::span<const std::size_t> widths);

  std::size_t input_width() const;
  std::size_t output_width() const;
  std::size_t parameter_count() const;
  /// Layer widths, input first.
  std::vector<std::size_t> widths() const;

  /// Flat view W0, b0, W1, b1, ... used by the optimizer and checkpoints.
  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// Widths of the 4-layer, 128-unit networks used for encoder and decoder.
std::vector<std::size_t> standard_widths(std::size_t in, std::size_t out, std::size_t hidden = 128);

/// An MlpParams registered on a graph. Forwarding several inputs through the
/// same binding shares parameter nodes, so gradients accumulate.
class BoundMlp {
 public:
  BoundMlp(Graph& graph, const MlpParams& params);

  Var forward(Var input) const;
  /// Gradients in the layout of MlpParams::tensors().
  std::vector<Tensor> gradients() const;

 private:
  Graph* graph_;
  const MlpParams* params_;
  std::vector<Var> weights_;
  std::vector<Var> biases_;
};

/// One-shot forward; binds `params` on `graph` first.
Var mlp_forward(const MlpParams& params, Var input, Graph& graph);

}  // namespace anmvae::ad
