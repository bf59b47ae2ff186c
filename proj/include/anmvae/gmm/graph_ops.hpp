#pragma once

#include <cstddef>

#include "anmvae/autodiff/graph.hpp"
#include "anmvae/gmm/gmm.hpp"

// Differentiable mixture log-density and KL estimate on an autodiff tape.
namespace anmvae::gmm {

/// Mixture whose component parameters live on a graph, one entry per
/// component in each [N] vector.
struct GmmVars {
  ad::Var mean_t;
  ad::Var mean_y;
  ad::Var cov_tt;
  ad::Var cov_ty;
  ad::Var cov_yy;

  std::size_t size() const { return mean_t.value().size(); }
};

GmmVars constant_vars(ad::Graph& graph, const Gmm& gmm);

/// Points (x_t[i], x_y[i]).
struct SampleVars {
  ad::Var x_t;
  ad::Var x_y;
};

/// [I] log-densities of the points under the mixture, differentiable w.r.t.
/// the points and every component parameter.
ad::Var log_density(const GmmVars& gmm, const SampleVars& x);
/// Same, for a fixed mixture kept in double precision (no parameter grads).
ad::Var log_density(ad::Graph& graph, const Gmm& fixed, const SampleVars& x);

/// mean + L eta per component via a differentiable 2x2 Cholesky factor.
/// `eta_t`, `eta_y` hold samples_per_component * N draws, sample-major:
/// entry s * N + c belongs to component c.
SampleVars reparameterized_sample(const GmmVars& q, const ad::Tensor& eta_t,
                                  const ad::Tensor& eta_y);

/// mean_i[ln q(x_i) - ln p(x_i)] at given samples of q.
ad::Var kl_mc_at(const GmmVars& q, const Gmm& p, const SampleVars& x);
ad::Var kl_mc_at(const GmmVars& q, const GmmVars& p, const SampleVars& x);

/// Draws eta from `rng` and evaluates kl_mc_at.
ad::Var kl_mc(const GmmVars& q, const Gmm& p, std::size_t samples_per_component, Rng& rng);

}  // namespace anmvae::gmm
