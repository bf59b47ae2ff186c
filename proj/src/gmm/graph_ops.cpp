#include "anmvae/gmm/graph_ops.hpp"

#include <string>

#include "anmvae/autodiff/ops.hpp"
#include "anmvae/errors.hpp"
#include "kernel.hpp"

namespace anmvae::gmm {
namespace {

using ad::Graph;
using ad::Tensor;
using ad::Var;

std::vector<double> to_double(const Tensor& t) {
  return std::vector<double>(t.data().begin(), t.data().end());
}

void require_points(const SampleVars& x) {
  if (x.x_t.graph != x.x_y.graph || x.x_t.graph == nullptr) {
    throw ConfigError("sample coordinates belong to different graphs");
  }
  if (x.x_t.value().size() != x.x_y.value().size()) {
    throw ConfigError("sample coordinate vectors differ in length");
  }
}

/// Records the fused log-density node. `param_ids` are the five component
/// parameter nodes (mean_t, mean_y, cov_tt, cov_ty, cov_yy) or empty for a
/// fixed mixture.
Var record_log_density(Graph& g, std::shared_ptr<const detail::ComponentTable> table,
                       const SampleVars& x, std::vector<std::size_t> param_ids) {
  const std::size_t count = x.x_t.value().size();
  const std::vector<double> xt = to_double(x.x_t.value());
  const std::vector<double> xy = to_double(x.x_y.value());
  std::vector<double> out(count);
  detail::log_density(*table, xt.data(), xy.data(), count, out.data(), nullptr);

  Tensor y({count});
  for (std::size_t i = 0; i < count; ++i) {
    y[i] = static_cast<float>(out[i]);
  }
  std::vector<std::size_t> inputs = {x.x_t.id, x.x_y.id};
  inputs.insert(inputs.end(), param_ids.begin(), param_ids.end());
  const std::size_t xt_id = x.x_t.id, xy_id = x.x_y.id;

  return g.record(std::move(y), inputs,
                  [table, xt, xy, xt_id, xy_id, param_ids](Graph& g, const Tensor& gy) {
                    const std::size_t count = xt.size();
                    const std::size_t n = table->size();
                    std::vector<double> out(count);
                    std::vector<double> w;
                    detail::log_density(*table, xt.data(), xy.data(), count, out.data(), &w);

                    std::vector<double> g_xt(count, 0.0), g_xy(count, 0.0);
                    std::vector<double> g_mt(n, 0.0), g_my(n, 0.0);
                    std::vector<double> g_a(n, 0.0), g_b(n, 0.0), g_c(n, 0.0);
                    for (std::size_t i = 0; i < count; ++i) {
                      for (std::size_t j = 0; j < n; ++j) {
                        const double wij = w[i * n + j] * gy[i];
                        if (wij == 0.0) {
                          continue;
                        }
                        const double dt = xt[i] - table->mean_t[j];
                        const double dy = xy[i] - table->mean_y[j];
                        // P d
                        const double pt = table->prec_tt[j] * dt + table->prec_ty[j] * dy;
                        const double py = table->prec_ty[j] * dt + table->prec_yy[j] * dy;
                        g_xt[i] -= wij * pt;
                        g_xy[i] -= wij * py;
                        g_mt[j] += wij * pt;
                        g_my[j] += wij * py;
                        // d s / d Sigma = 1/2 (P d d^T P - P); off-diagonal counted twice
                        g_a[j] += wij * 0.5 * (pt * pt - table->prec_tt[j]);
                        g_c[j] += wij * 0.5 * (py * py - table->prec_yy[j]);
                        g_b[j] += wij * (pt * py - table->prec_ty[j]);
                      }
                    }
                    auto push = [&g](std::size_t id, const std::vector<double>& v) {
                      if (!g.requires_grad(id)) {
                        return;
                      }
                      Tensor& slot = g.grad_slot(id);
                      for (std::size_t k = 0; k < v.size(); ++k) {
                        slot[k] += static_cast<float>(v[k]);
                      }
                    };
                    push(xt_id, g_xt);
                    push(xy_id, g_xy);
                    if (!param_ids.empty()) {
                      push(param_ids[0], g_mt);
                      push(param_ids[1], g_my);
                      push(param_ids[2], g_a);
                      push(param_ids[3], g_b);
                      push(param_ids[4], g_c);
                    }
                  });
}

}  // namespace

GmmVars constant_vars(Graph& graph, const Gmm& gmm) {
  const std::size_t n = gmm.size();
  Tensor mt({n}), my({n}), a({n}), b({n}), c({n});
  for (std::size_t j = 0; j < n; ++j) {
    mt[j] = static_cast<float>(gmm[j].mean(0));
    my[j] = static_cast<float>(gmm[j].mean(1));
    a[j] = static_cast<float>(gmm[j].cov(0, 0));
    b[j] = static_cast<float>(gmm[j].cov(0, 1));
    c[j] = static_cast<float>(gmm[j].cov(1, 1));
  }
  return {graph.constant(std::move(mt)), graph.constant(std::move(my)), graph.constant(std::move(a)),
          graph.constant(std::move(b)), graph.constant(std::move(c))};
}

Var log_density(const GmmVars& gmm, const SampleVars& x) {
  require_points(x);
  Graph& g = *x.x_t.graph;
  const Var params[5] = {gmm.mean_t, gmm.mean_y, gmm.cov_tt, gmm.cov_ty, gmm.cov_yy};
  auto table = std::make_shared<detail::ComponentTable>();
  const std::size_t n = gmm.mean_t.value().size();
  if (n == 0) {
    throw ConfigError("a mixture needs at least one component");
  }
  std::vector<double>* cols[5] = {&table->mean_t, &table->mean_y, &table->cov_tt, &table->cov_ty,
                                  &table->cov_yy};
  std::vector<std::size_t> ids;
  for (int k = 0; k < 5; ++k) {
    if (params[k].graph != &g) {
      throw ConfigError("mixture parameters belong to a different graph");
    }
    if (params[k].value().size() != n) {
      throw ConfigError("mixture parameter vectors differ in length");
    }
    *cols[k] = to_double(params[k].value());
    ids.push_back(params[k].id);
  }
  table->finalize();
  return record_log_density(g, std::move(table), x, std::move(ids));
}

Var log_density(Graph& graph, const Gmm& fixed, const SampleVars& x) {
  require_points(x);
  if (x.x_t.graph != &graph) {
    throw ConfigError("samples belong to a different graph");
  }
  auto table = std::make_shared<detail::ComponentTable>();
  table->resize(fixed.size());
  for (std::size_t j = 0; j < fixed.size(); ++j) {
    table->mean_t[j] = fixed[j].mean(0);
    table->mean_y[j] = fixed[j].mean(1);
    table->cov_tt[j] = fixed[j].cov(0, 0);
    table->cov_ty[j] = fixed[j].cov(0, 1);
    table->cov_yy[j] = fixed[j].cov(1, 1);
  }
  table->finalize();
  return record_log_density(graph, std::move(table), x, {});
}

SampleVars reparameterized_sample(const GmmVars& q, const Tensor& eta_t, const Tensor& eta_y) {
  Graph& g = *q.mean_t.graph;
  const std::size_t n = q.size();
  if (eta_t.size() != eta_y.size() || eta_t.size() % n != 0 || eta_t.size() == 0) {
    throw ConfigError("noise length must be a positive multiple of the component count");
  }
  std::vector<std::size_t> idx(eta_t.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    idx[i] = i % n;
  }
  const Var l00 = ad::sqrt(q.cov_tt);
  const Var l10 = q.cov_ty / l00;
  const Var l11 = ad::sqrt(q.cov_yy - ad::square(l10));
  const Var et = g.constant(Tensor({eta_t.size()}, {eta_t.data().begin(), eta_t.data().end()}));
  const Var ey = g.constant(Tensor({eta_y.size()}, {eta_y.data().begin(), eta_y.data().end()}));
  const Var xt = ad::gather(q.mean_t, idx) + ad::gather(l00, idx) * et;
  const Var xy = ad::gather(q.mean_y, idx) + ad::gather(l10, idx) * et + ad::gather(l11, idx) * ey;
  return {xt, xy};
}

Var kl_mc_at(const GmmVars& q, const Gmm& p, const SampleVars& x) {
  const Var lq = log_density(q, x);
  const Var lp = log_density(*x.x_t.graph, p, x);
  return ad::mean(lq - lp);
}

Var kl_mc_at(const GmmVars& q, const GmmVars& p, const SampleVars& x) {
  return ad::mean(log_density(q, x) - log_density(p, x));
}

Var kl_mc(const GmmVars& q, const Gmm& p, std::size_t samples_per_component, Rng& rng) {
  if (samples_per_component == 0) {
    throw ConfigError("samples_per_component must be at least 1");
  }
  const std::size_t total = q.size() * samples_per_component;
  std::normal_distribution<double> normal;
  Tensor eta_t({total}), eta_y({total});
  for (std::size_t i = 0; i < total; ++i) {
    eta_t[i] = static_cast<float>(normal(rng));
    eta_y[i] = static_cast<float>(normal(rng));
  }
  return kl_mc_at(q, p, reparameterized_sample(q, eta_t, eta_y));
}

}  // namespace anmvae::gmm
