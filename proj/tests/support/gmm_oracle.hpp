#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "anmvae/gmm/gmm.hpp"

namespace anmvae::testing {

/// Log-density of one bivariate normal written out directly.
inline double normal2_logpdf(const gmm::Vec2& x, const gmm::Vec2& m, const gmm::Mat2& s) {
  const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  const double dx = x(0) - m(0), dy = x(1) - m(1);
  // inverse of [[a, b], [b, c]] is [[c, -b], [-b, a]] / det
  const double q = (s(1, 1) * dx * dx - 2 * s(0, 1) * dx * dy + s(0, 0) * dy * dy) / det;
  return -std::log(2 * std::numbers::pi) - 0.5 * std::log(det) - 0.5 * q;
}

/// Literal mixture density: ln( (1/N) sum_j exp(log N_j) ). Underflows far
/// from every component.
inline double naive_mixture_logpdf(const gmm::Gmm& g, const gmm::Vec2& x) {
  double acc = 0.0;
  for (const auto& c : g.components()) {
    acc += std::exp(normal2_logpdf(x, c.mean, c.cov));
  }
  return std::log(acc / static_cast<double>(g.size()));
}

/// KL between two bivariate normals from the textbook formula.
inline double gaussian_kl(const gmm::Gaussian2& a, const gmm::Gaussian2& b) {
  const gmm::Mat2 bi = b.cov.inverse();
  const gmm::Vec2 d = b.mean - a.mean;
  return 0.5 * ((bi * a.cov).trace() + d.dot(bi * d) - 2.0 +
                std::log(b.cov.determinant() / a.cov.determinant()));
}

/// Random SPD covariance with eigenvalues in [lo, hi].
template <class Rng>
gmm::Gaussian2 random_gaussian(Rng& rng, double lo = 0.2, double hi = 2.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double angle = u(rng) * std::numbers::pi;
  const double e1 = lo + (hi - lo) * u(rng), e2 = lo + (hi - lo) * u(rng);
  gmm::Mat2 r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  gmm::Mat2 cov = r * gmm::Vec2(e1, e2).asDiagonal() * r.transpose();
  cov(1, 0) = cov(0, 1);
  return gmm::Gaussian2::make(gmm::Vec2(4 * u(rng) - 2, 4 * u(rng) - 2), cov);
}

}  // namespace anmvae::testing
