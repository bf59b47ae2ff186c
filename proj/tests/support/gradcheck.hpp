#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "anmvae/autodiff/graph.hpp"
#include "anmvae/random.hpp"

namespace anmvae::testing {

/// Builds a scalar loss from graph variables holding `inputs`.
using LossFn = std::function<ad::Var(ad::Graph&, std::span<const ad::Var>)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

/// Compares reverse-mode gradients with central differences. The relative
/// error of each entry is |analytic - numeric| / max(|analytic|, |numeric|,
/// floor), where floor = 1e-2 * the largest numeric gradient magnitude, so
/// entries that are tiny compared with the rest do not amplify float noise.
/// `max_entries` > 0 checks a deterministic subset of each input.
inline GradCheckResult grad_check(const LossFn& loss, std::vector<ad::Tensor> inputs,
                                  double h = 1e-2, std::size_t max_entries = 0) {
  std::vector<ad::Tensor> analytic;
  {
    ad::Graph g;
    std::vector<ad::Var> vars;
    for (const auto& t : inputs) {
      vars.push_back(g.variable(t));
    }
    g.backward(loss(g, vars));
    for (const auto& v : vars) {
      analytic.push_back(g.grad(v));
    }
  }
  auto eval = [&] {
    ad::Graph g;
    std::vector<ad::Var> vars;
    for (const auto& t : inputs) {
      vars.push_back(g.constant(t));
    }
    return static_cast<double>(loss(g, vars).value().item());
  };
  struct Entry {
    std::size_t input, index;
    double analytic, numeric;
  };
  std::vector<Entry> entries;
  Rng pick(12345);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    std::vector<std::size_t> idx(inputs[k].size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      idx[i] = i;
    }
    if (max_entries > 0 && idx.size() > max_entries) {
      std::shuffle(idx.begin(), idx.end(), pick);
      idx.resize(max_entries);
    }
    for (std::size_t i : idx) {
      const float orig = inputs[k][i];
      const double step = h * std::max(1.0, std::abs(static_cast<double>(orig)));
      inputs[k][i] = static_cast<float>(orig + step);
      const double up = eval();
      inputs[k][i] = static_cast<float>(orig - step);
      const double down = eval();
      inputs[k][i] = orig;
      // the float perturbation actually applied
      const double applied = static_cast<double>(static_cast<float>(orig + step)) -
                             static_cast<double>(static_cast<float>(orig - step));
      entries.push_back({k, i, analytic[k][i], (up - down) / applied});
    }
  }
  double scale = 0.0;
  for (const auto& e : entries) {
    scale = std::max(scale, std::abs(e.numeric));
  }
  const double floor = std::max(1e-2 * scale, 1e-6);
  GradCheckResult r;
  for (const auto& e : entries) {
    const double denom = std::max({std::abs(e.analytic), std::abs(e.numeric), floor});
    r.max_rel_error = std::max(r.max_rel_error, std::abs(e.analytic - e.numeric) / denom);
  }
  r.checked = entries.size();
  return r;
}

/// Random tensor with entries uniform in [lo, hi].
inline ad::Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, float lo = -1.0f,
                                float hi = 1.0f) {
  ad::Tensor t(std::move(shape));
  std::uniform_real_distribution<float> u(lo, hi);
  for (float& v : t.data()) {
    v = u(rng);
  }
  return t;
}

}  // namespace anmvae::testing
