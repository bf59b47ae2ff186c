#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "anmvae/gmm/gmm.hpp"
#include "anmvae/mechanism/expr.hpp"
#include "anmvae/random.hpp"

namespace anmvae::prior {

/// Uniform time distribution p_T on [low, high].
struct TimeDistribution {
  double low = 0.0;
  double high = 1.0;

  void validate() const;
  double sample(Rng& rng) const;
};

/// Additive noise model y = f(t) + n with t ~ p_T, n ~ N(0, sigma_n^2), and
/// the parameters of its Gaussian-mixture approximation.
struct AnmPriorSpec {
  mech::MechanismExpr mechanism;
  TimeDistribution time;
  double sigma_t = 0.01;
  double sigma_n = 0.05;
  std::size_t n_components = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// First-order expansion of f around t0:
///   mean = (t0, f(t0) + n0)
///   cov  = [[s_t^2, f' s_t^2], [f' s_t^2, f'^2 s_t^2 + s_n^2]]
gmm::Gaussian2 linearize_component(const mech::MechanismExpr& mech, double t0, double n0,
                                   double sigma_t, double sigma_n);

/// Equal-weight mixture of linearized components at (t0, n0) draws. Draw j
/// uses substream (seed, j), so the result is a pure function of the spec.
gmm::Gmm build_prior_gmm(const AnmPriorSpec& spec);

/// Draws from the true, un-linearized model: t ~ p_T, y = f(t) + n.
std::vector<gmm::Vec2> exact_anm_sample(const AnmPriorSpec& spec, Rng& rng, std::size_t count);

}  // namespace anmvae::prior
