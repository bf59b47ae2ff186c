#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "anmvae/autodiff/tensor.hpp"

namespace anmvae::ad {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class AdamState {
 public:
  AdamState(AdamConfig config, std::span<const Tensor* const> layout);

  const AdamConfig& config() const noexcept { return config_; }
  std::uint64_t step() const noexcept { return step_; }
  const std::vector<Tensor>& first_moments() const noexcept { return m_; }
  const std::vector<Tensor>& second_moments() const noexcept { return v_; }

  /// Bias-corrected Adam update of `params` in place.
  void apply(std::span<Tensor* const> params, std::span<const Tensor> grads);

 private:
  AdamConfig config_;
  std::uint64_t step_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

inline void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads,
                      AdamState& state) {
  state.apply(params, grads);
}

}  // namespace anmvae::ad
