#include "anmvae/autodiff/adam.hpp"

#include <Eigen/Core>
#include <cmath>

#include "anmvae/errors.hpp"

namespace anmvae::ad {

AdamState::AdamState(AdamConfig config, std::span<const Tensor* const> layout) : config_(config) {
  for (const Tensor* t : layout) {
    m_.emplace_back(t->shape());
    v_.emplace_back(t->shape());
  }
}

void AdamState::apply(std::span<Tensor* const> params, std::span<const Tensor> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ConfigError("Adam: parameter layout does not match optimizer state");
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const float b1 = static_cast<float>(config_.beta1);
  const float b2 = static_cast<float>(config_.beta2);
  const float c1 = static_cast<float>(1.0 / (1.0 - std::pow(config_.beta1, t)));
  const float c2 = static_cast<float>(1.0 / (1.0 - std::pow(config_.beta2, t)));
  const float lr = static_cast<float>(config_.lr);
  const float eps = static_cast<float>(config_.eps);

  using Map = Eigen::Map<Eigen::ArrayXf>;
  using ConstMap = Eigen::Map<const Eigen::ArrayXf>;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->size() != m_[i].size() || grads[i].size() != m_[i].size()) {
      throw ConfigError("Adam: tensor " + std::to_string(i) + " changed size");
    }
    const auto n = static_cast<Eigen::Index>(m_[i].size());
    Map p(params[i]->raw(), n), m(m_[i].raw(), n), v(v_[i].raw(), n);
    ConstMap g(grads[i].raw(), n);
    m = b1 * m + (1.0f - b1) * g;
    v = b2 * v + (1.0f - b2) * g.square();
    p -= lr * (m * c1) / ((v * c2).sqrt() + eps);
  }
}

}  // namespace anmvae::ad
