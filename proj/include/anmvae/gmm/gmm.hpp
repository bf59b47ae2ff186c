#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

#include "anmvae/random.hpp"

namespace anmvae::gmm {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// 2-D Gaussian over (t, y) with a full SPD covariance.
struct Gaussian2 {
  Vec2 mean = Vec2::Zero();
  Mat2 cov = Mat2::Identity();

  /// Validated construction; throws NumericalDomainError for covariances
  /// that are asymmetric, have a non-positive diagonal, or det <= 1e-30.
  static Gaussian2 make(const Vec2& mean, const Mat2& cov);

  double det() const { return cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0); }
  double logdet() const;
  Mat2 inverse() const;
  /// Lower-triangular L with L L^T = cov.
  Mat2 cholesky() const;

  friend bool operator==(const Gaussian2& a, const Gaussian2& b) {
    return a.mean == b.mean && a.cov == b.cov;
  }
};

void validate(const Gaussian2& g);

/// Equal-weight mixture of Gaussian2 components.
class Gmm {
 public:
  explicit Gmm(std::vector<Gaussian2> components);

  std::size_t size() const noexcept { return components_.size(); }
  const std::vector<Gaussian2>& components() const noexcept { return components_; }
  const Gaussian2& operator[](std::size_t i) const { return components_[i]; }

  friend bool operator==(const Gmm&, const Gmm&) = default;

 private:
  std::vector<Gaussian2> components_;
};

/// ln p(x) = -ln N - ln 2pi + logsumexp_j[-1/2 ln det S_j - 1/2 (x-m_j)^T S_j^-1 (x-m_j)].
double log_density(const Gmm& gmm, const Vec2& x);
std::vector<double> log_density(const Gmm& gmm, std::span<const Vec2> xs);

struct GmmSample {
  Vec2 point;
  std::size_t component;
  Vec2 noise;  // standard-normal eta with point = mean + L eta
};

/// Uniform component choice, then mean + L eta.
std::vector<GmmSample> sample(const Gmm& gmm, Rng& rng, std::size_t count);

/// Exact KL(a || b) between two Gaussians.
double closed_form_gaussian_kl(const Gaussian2& a, const Gaussian2& b);

struct KlEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Monte-Carlo KL(q || p) with `samples_per_component` draws from every
/// component of q, so I = samples_per_component * q.size().
KlEstimate kl_mc(const Gmm& q, const Gmm& p, std::size_t samples_per_component, Rng& rng);

}  // namespace anmvae::gmm
