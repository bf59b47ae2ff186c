#include "anmvae/gmm/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "anmvae/autodiff/ops.hpp"
#include "anmvae/errors.hpp"
#include "kernel.hpp"

namespace anmvae::gmm {
namespace detail {

void ComponentTable::resize(std::size_t n) {
  for (auto* v : {&mean_t, &mean_y, &cov_tt, &cov_ty, &cov_yy, &prec_tt, &prec_ty, &prec_yy,
                  &logdet}) {
    v->resize(n);
  }
}

void ComponentTable::finalize() {
  const std::size_t n = size();
  prec_tt.resize(n);
  prec_ty.resize(n);
  prec_yy.resize(n);
  logdet.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = cov_tt[j], b = cov_ty[j], c = cov_yy[j];
    const double det = a * c - b * b;
    if (!(det > ad::kMinDeterminant) || !(a > 0.0) || !(c > 0.0)) {
      throw NumericalDomainError("mixture component " + std::to_string(j) +
                                     " has a non-SPD covariance (det = " + std::to_string(det) + ")",
                                 det);
    }
    prec_tt[j] = c / det;
    prec_ty[j] = -b / det;
    prec_yy[j] = a / det;
    logdet[j] = std::log(det);
  }
}

void log_density(const ComponentTable& comps, const double* xt, const double* xy,
                 std::size_t count, double* out, std::vector<double>* weights) {
  const std::size_t n = comps.size();
  const double offset = -std::log(static_cast<double>(n)) - std::log(2.0 * std::numbers::pi);
  std::vector<double> scores(n);
  if (weights != nullptr) {
    weights->assign(count * n, 0.0);
  }
  for (std::size_t i = 0; i < count; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      const double dt = xt[i] - comps.mean_t[j];
      const double dy = xy[i] - comps.mean_y[j];
      const double quad = comps.prec_tt[j] * dt * dt + 2.0 * comps.prec_ty[j] * dt * dy +
                          comps.prec_yy[j] * dy * dy;
      scores[j] = -0.5 * comps.logdet[j] - 0.5 * quad;
      m = std::max(m, scores[j]);
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      scores[j] = std::exp(scores[j] - m);
      acc += scores[j];
    }
    out[i] = offset + m + std::log(acc);
    if (weights != nullptr) {
      double* w = weights->data() + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        w[j] = scores[j] / acc;
      }
    }
  }
}

}  // namespace detail

namespace {

detail::ComponentTable table_of(const Gmm& gmm) {
  detail::ComponentTable t;
  t.resize(gmm.size());
  for (std::size_t j = 0; j < gmm.size(); ++j) {
    const Gaussian2& g = gmm[j];
    t.mean_t[j] = g.mean(0);
    t.mean_y[j] = g.mean(1);
    t.cov_tt[j] = g.cov(0, 0);
    t.cov_ty[j] = g.cov(0, 1);
    t.cov_yy[j] = g.cov(1, 1);
  }
  t.finalize();
  return t;
}

}  // namespace

void validate(const Gaussian2& g) {
  if (!g.mean.allFinite() || !g.cov.allFinite()) {
    throw NumericalDomainError("Gaussian2 has non-finite parameters",
                               std::numeric_limits<double>::quiet_NaN());
  }
  if (g.cov(0, 1) != g.cov(1, 0)) {
    throw NumericalDomainError("Gaussian2 covariance is not symmetric", g.cov(0, 1) - g.cov(1, 0));
  }
  if (!(g.cov(0, 0) > 0.0) || !(g.cov(1, 1) > 0.0)) {
    throw NumericalDomainError("Gaussian2 covariance has a non-positive diagonal entry",
                               std::min(g.cov(0, 0), g.cov(1, 1)));
  }
  const double det = g.det();
  if (!(det > ad::kMinDeterminant)) {
    throw NumericalDomainError("Gaussian2 covariance is singular (det = " + std::to_string(det) + ")",
                               det);
  }
}

Gaussian2 Gaussian2::make(const Vec2& mean, const Mat2& cov) {
  Gaussian2 g{mean, cov};
  validate(g);
  return g;
}

double Gaussian2::logdet() const { return std::log(det()); }

Mat2 Gaussian2::inverse() const {
  const double d = det();
  Mat2 inv;
  inv << cov(1, 1) / d, -cov(0, 1) / d, -cov(1, 0) / d, cov(0, 0) / d;
  return inv;
}

Mat2 Gaussian2::cholesky() const {
  const double l00 = std::sqrt(cov(0, 0));
  const double l10 = cov(1, 0) / l00;
  const double rest = cov(1, 1) - l10 * l10;
  if (!(rest > 0.0)) {
    throw NumericalDomainError("Cholesky factorisation failed: covariance not SPD", rest);
  }
  Mat2 l;
  l << l00, 0.0, l10, std::sqrt(rest);
  return l;
}

Gmm::Gmm(std::vector<Gaussian2> components) : components_(std::move(components)) {
  if (components_.empty()) {
    throw ConfigError("a mixture needs at least one component");
  }
  for (const Gaussian2& g : components_) {
    validate(g);
  }
}

double log_density(const Gmm& gmm, const Vec2& x) {
  return log_density(gmm, std::span<const Vec2>(&x, 1))[0];
}

std::vector<double> log_density(const Gmm& gmm, std::span<const Vec2> xs) {
  const detail::ComponentTable t = table_of(gmm);
  std::vector<double> xt(xs.size()), xy(xs.size()), out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xt[i] = xs[i](0);
    xy[i] = xs[i](1);
  }
  detail::log_density(t, xt.data(), xy.data(), xs.size(), out.data(), nullptr);
  return out;
}

std::vector<GmmSample> sample(const Gmm& gmm, Rng& rng, std::size_t count) {
  if (count == 0) {
    throw ConfigError("sample count must be at least 1");
  }
  std::vector<Mat2> factors;
  for (const Gaussian2& g : gmm.components()) {
    factors.push_back(g.cholesky());
  }
  std::uniform_int_distribution<std::size_t> pick(0, gmm.size() - 1);
  std::normal_distribution<double> normal;
  std::vector<GmmSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t c = pick(rng);
    Vec2 eta;
    eta(0) = normal(rng);
    eta(1) = normal(rng);
    out.push_back({gmm[c].mean + factors[c] * eta, c, eta});
  }
  return out;
}

double closed_form_gaussian_kl(const Gaussian2& a, const Gaussian2& b) {
  const Mat2 b_inv = b.inverse();
  const Vec2 d = b.mean - a.mean;
  const double trace = (b_inv * a.cov).trace();
  const double quad = d.dot(b_inv * d);
  return 0.5 * (trace + quad - 2.0 + std::log(b.det() / a.det()));
}

KlEstimate kl_mc(const Gmm& q, const Gmm& p, std::size_t samples_per_component, Rng& rng) {
  if (samples_per_component == 0) {
    throw ConfigError("samples_per_component must be at least 1");
  }
  const detail::ComponentTable tq = table_of(q);
  const detail::ComponentTable tp = table_of(p);
  const std::size_t n = q.size();
  const std::size_t total = n * samples_per_component;
  std::vector<Mat2> factors;
  for (const Gaussian2& g : q.components()) {
    factors.push_back(g.cholesky());
  }
  std::normal_distribution<double> normal;
  std::vector<double> xt(total), xy(total);
  for (std::size_t s = 0; s < samples_per_component; ++s) {
    for (std::size_t c = 0; c < n; ++c) {
      Vec2 eta;
      eta(0) = normal(rng);
      eta(1) = normal(rng);
      const Vec2 x = q[c].mean + factors[c] * eta;
      xt[s * n + c] = x(0);
      xy[s * n + c] = x(1);
    }
  }
  std::vector<double> lq(total), lp(total);
  detail::log_density(tq, xt.data(), xy.data(), total, lq.data(), nullptr);
  detail::log_density(tp, xt.data(), xy.data(), total, lp.data(), nullptr);
  double sum = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    sum += lq[i] - lp[i];
  }
  const double mean = sum / static_cast<double>(total);
  double ss = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    const double d = (lq[i] - lp[i]) - mean;
    ss += d * d;
  }
  const double var = total > 1 ? ss / static_cast<double>(total - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(total)), total};
}

}  // namespace anmvae::gmm
