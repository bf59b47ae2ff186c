#pragma once

#include <cstddef>
#include <vector>

// Shared evaluation core for the plain and graph log-density paths.
namespace anmvae::gmm::detail {

/// Component parameters with precomputed inverse covariance and log det.
struct ComponentTable {
  std::vector<double> mean_t, mean_y;
  std::vector<double> cov_tt, cov_ty, cov_yy;
  std::vector<double> prec_tt, prec_ty, prec_yy;
  std::vector<double> logdet;

  std::size_t size() const { return mean_t.size(); }
  void resize(std::size_t n);
  /// Fills the precision/logdet columns; throws NumericalDomainError.
  void finalize();
};

/// out[i] = ln mixture density at (xt[i], xy[i]). When `weights` is non-null
/// it receives the I x N row-major responsibilities.
void log_density(const ComponentTable& comps, const double* xt, const double* xy,
                 std::size_t count, double* out, std::vector<double>* weights);

}  // namespace anmvae::gmm::detail
