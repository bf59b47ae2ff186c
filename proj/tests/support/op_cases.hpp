#pragma once

#include <string>
#include <vector>

#include "anmvae/autodiff/ops.hpp"
#include "anmvae/gmm/graph_ops.hpp"
#include "gradcheck.hpp"

namespace anmvae::testing {

struct OpCase {
  std::string name;
  LossFn loss;
  std::vector<ad::Tensor> inputs;
};

/// Weighted sum so that every output entry gets a distinct upstream gradient.
inline ad::Var weighted(ad::Graph& g, ad::Var y, std::uint64_t seed) {
  Rng rng(seed);
  return ad::sum(y * g.constant(random_tensor(y.value().shape(), rng, 0.5f, 1.5f)));
}

/// Values bounded away from zero (kinks of relu) in both signs.
inline ad::Tensor away_from_zero(std::vector<std::size_t> shape, Rng& rng) {
  ad::Tensor t = random_tensor(std::move(shape), rng);
  for (float& v : t.data()) {
    v = (v < 0 ? -1.0f : 1.0f) * (0.2f + 0.8f * std::abs(v));
  }
  return t;
}

/// One finite-difference case per differentiable operation.
inline std::vector<OpCase> op_cases() {
  using ad::Var;
  using ad::Tensor;
  Rng rng(2024);
  auto R = [&](std::vector<std::size_t> s, float lo = -1.0f, float hi = 1.0f) {
    return random_tensor(std::move(s), rng, lo, hi);
  };
  std::vector<OpCase> c;
  auto unary = [&](std::string name, Var (*op)(Var), Tensor x) {
    c.push_back({std::move(name),
                 [op](ad::Graph& g, std::span<const Var> v) { return weighted(g, op(v[0]), 1); },
                 {std::move(x)}});
  };
  c.push_back({"add", [](ad::Graph& g, std::span<const Var> v) { return weighted(g, v[0] + v[1], 1); },
               {R({3, 4}), R({3, 4})}});
  c.push_back({"sub", [](ad::Graph& g, std::span<const Var> v) { return weighted(g, v[0] - v[1], 1); },
               {R({3, 4}), R({3, 4})}});
  c.push_back({"mul", [](ad::Graph& g, std::span<const Var> v) { return weighted(g, v[0] * v[1], 1); },
               {R({3, 4}), R({3, 4})}});
  c.push_back({"div", [](ad::Graph& g, std::span<const Var> v) { return weighted(g, v[0] / v[1], 1); },
               {R({3, 4}), R({3, 4}, 0.5f, 2.0f)}});
  unary("neg", ad::neg, R({5}));
  unary("exp", ad::exp, R({5}));
  unary("log", ad::log, R({5}, 0.5f, 2.0f));
  unary("sqrt", ad::sqrt, R({5}, 0.5f, 2.0f));
  unary("square", ad::square, R({5}));
  unary("relu", ad::relu, away_from_zero({6}, rng));
  unary("logistic", ad::logistic, R({5}, -3.0f, 3.0f));
  c.push_back({"clamp",
               [](ad::Graph& g, std::span<const Var> v) { return weighted(g, ad::clamp(v[0], -0.5f, 0.5f), 1); },
               {Tensor::vector({-0.9f, -0.3f, 0.1f, 0.35f, 0.8f})}});
  c.push_back({"scale",
               [](ad::Graph& g, std::span<const Var> v) { return weighted(g, ad::scale(v[0], -2.5), 1); },
               {R({4})}});
  c.push_back({"add_scalar",
               [](ad::Graph& g, std::span<const Var> v) { return weighted(g, ad::add_scalar(v[0], 3.0), 1); },
               {R({4})}});
  c.push_back({"sum", [](ad::Graph&, std::span<const Var> v) { return ad::sum(ad::square(v[0])); },
               {R({3, 4})}});
  c.push_back({"mean", [](ad::Graph&, std::span<const Var> v) { return ad::mean(ad::square(v[0])); },
               {R({3, 4})}});
  c.push_back({"sum_rows", [](ad::Graph& g, std::span<const Var> v) { return weighted(g, ad::sum_rows(v[0]), 1); },
               {R({3, 4})}});
  c.push_back({"matmul", [](ad::Graph& g, std::span<const Var> v) { return weighted(g, ad::matmul(v[0], v[1]), 1); },
               {R({3, 4}), R({4, 2})}});
  c.push_back({"matvec", [](ad::Graph& g, std::span<const Var> v) { return weighted(g, ad::matvec(v[0], v[1]), 1); },
               {R({3, 4}), R({4})}});
  c.push_back({"add_rowvec",
               [](ad::Graph& g, std::span<const Var> v) { return weighted(g, ad::add_rowvec(v[0], v[1]), 1); },
               {R({3, 4}), R({4})}});
  c.push_back({"linear",
               [](ad::Graph& g, std::span<const Var> v) { return weighted(g, ad::linear(v[0], v[1], v[2]), 1); },
               {R({3, 4}), R({4, 2}), R({2})}});
  c.push_back({"squared_error",
               [](ad::Graph&, std::span<const Var> v) { return ad::squared_error(v[0], v[1]); },
               {R({3, 4}), R({3, 4})}});
  c.push_back({"column", [](ad::Graph& g, std::span<const Var> v) { return weighted(g, ad::column(v[0], 2), 1); },
               {R({3, 4})}});
  c.push_back({"stack_columns",
               [](ad::Graph& g, std::span<const Var> v) {
                 std::vector<Var> cols{v[0], v[1], v[0]};
                 return weighted(g, ad::stack_columns(cols), 1);
               },
               {R({3}), R({3})}});
  c.push_back({"gather",
               [](ad::Graph& g, std::span<const Var> v) {
                 const std::vector<std::size_t> idx{4, 0, 4, 2};
                 return weighted(g, ad::gather(v[0], idx), 1);
               },
               {R({5})}});
  c.push_back({"reshape",
               [](ad::Graph& g, std::span<const Var> v) { return weighted(g, ad::reshape(v[0], {2, 6}), 1); },
               {R({3, 4})}});
  c.push_back({"logsumexp", [](ad::Graph&, std::span<const Var> v) { return ad::logsumexp(v[0]); },
               {R({6}, -3.0f, 3.0f)}});
  c.push_back({"logsumexp_rows",
               [](ad::Graph& g, std::span<const Var> v) { return weighted(g, ad::logsumexp_rows(v[0]), 1); },
               {R({3, 5}, -3.0f, 3.0f)}});
  c.push_back({"logdet2x2", [](ad::Graph&, std::span<const Var> v) { return ad::logdet2x2(v[0]); },
               {Tensor::matrix(2, 2, {2.0f, 0.3f, 0.3f, 1.0f})}});
  c.push_back({"inverse2x2",
               [](ad::Graph& g, std::span<const Var> v) { return weighted(g, ad::inverse2x2(v[0]), 1); },
               {Tensor::matrix(2, 2, {2.0f, 0.3f, 0.3f, 1.0f})}});

  // Mixture operations: inputs are mean_t, mean_y, cov_tt, cov_ty, cov_yy,
  // then point coordinates.
  auto mixture = [&](std::size_t n) {
    return std::vector<Tensor>{R({n}), R({n}), R({n}, 0.5f, 1.0f), R({n}, -0.2f, 0.2f),
                               R({n}, 0.5f, 1.0f)};
  };
  auto vars = [](std::span<const Var> v, std::size_t first) {
    return gmm::GmmVars{v[first], v[first + 1], v[first + 2], v[first + 3], v[first + 4]};
  };
  {
    auto in = mixture(3);
    in.push_back(R({4}));
    in.push_back(R({4}));
    c.push_back({"gmm_log_density",
                 [vars](ad::Graph& g, std::span<const Var> v) {
                   return weighted(g, gmm::log_density(vars(v, 0), {v[5], v[6]}), 1);
                 },
                 in});
  }
  {
    gmm::Gmm fixed({gmm::Gaussian2::make(gmm::Vec2(0.1, -0.2), (gmm::Mat2() << 0.6, 0.1, 0.1, 0.8).finished()),
                    gmm::Gaussian2::make(gmm::Vec2(-0.3, 0.4), (gmm::Mat2() << 0.9, -0.2, -0.2, 0.5).finished())});
    c.push_back({"gmm_log_density_fixed",
                 [fixed](ad::Graph& g, std::span<const Var> v) {
                   return weighted(g, gmm::log_density(g, fixed, {v[0], v[1]}), 1);
                 },
                 {R({4}), R({4})}});
  }
  {
    const Tensor eta_t = R({6}), eta_y = R({6});
    c.push_back({"reparameterized_sample",
                 [vars, eta_t, eta_y](ad::Graph& g, std::span<const Var> v) {
                   auto s = gmm::reparameterized_sample(vars(v, 0), eta_t, eta_y);
                   return weighted(g, s.x_t, 1) + weighted(g, s.x_y, 2);
                 },
                 mixture(3)});
  }
  {
    const Tensor eta_t = R({6}), eta_y = R({6});
    gmm::Gmm fixed({gmm::Gaussian2::make(gmm::Vec2(0.0, 0.0), (gmm::Mat2() << 1.0, 0.2, 0.2, 0.7).finished()),
                    gmm::Gaussian2::make(gmm::Vec2(0.5, -0.5), (gmm::Mat2() << 0.5, 0.0, 0.0, 0.9).finished())});
    c.push_back({"kl_mc_fixed_prior",
                 [vars, eta_t, eta_y, fixed](ad::Graph&, std::span<const Var> v) {
                   auto q = vars(v, 0);
                   return gmm::kl_mc_at(q, fixed, gmm::reparameterized_sample(q, eta_t, eta_y));
                 },
                 mixture(3)});
    auto in = mixture(3);
    for (auto& t : mixture(2)) {
      in.push_back(std::move(t));
    }
    c.push_back({"kl_mc_graph_prior",
                 [vars, eta_t, eta_y](ad::Graph&, std::span<const Var> v) {
                   auto q = vars(v, 0);
                   return gmm::kl_mc_at(q, vars(v, 5), gmm::reparameterized_sample(q, eta_t, eta_y));
                 },
                 in});
  }
  return c;
}

}  // namespace anmvae::testing
