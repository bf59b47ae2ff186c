#include "anmvae/eval/metrics.hpp"

#include <cmath>
#include <string>

#include "anmvae/errors.hpp"

namespace anmvae::eval {
namespace {

std::vector<double> standardize(std::span<const double> v, const char* which) {
  double mean = 0.0;
  for (double x : v) {
    mean += x;
  }
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) {
    var += (x - mean) * (x - mean);
  }
  var /= static_cast<double>(v.size());
  if (!(var > 0.0) || !std::isfinite(var)) {
    throw NumericalDomainError(std::string("degenerate latent: ") + which +
                                   " series has no variance",
                               var);
  }
  const double sd = std::sqrt(var);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = (v[i] - mean) / sd;
  }
  return out;
}

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b || a < 2) {
    throw ConfigError("series must have equal length >= 2 (got " + std::to_string(a) + " and " +
                      std::to_string(b) + ")");
  }
}

}  // namespace

double latent_mse(std::span<const double> pred, std::span<const double> gt) {
  check_lengths(pred.size(), gt.size());
  const auto p = standardize(pred, "predicted");
  const auto g = standardize(gt, "ground-truth");
  double plus = 0.0, minus = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    plus += (p[i] - g[i]) * (p[i] - g[i]);
    minus += (p[i] + g[i]) * (p[i] + g[i]);
  }
  return std::min(plus, minus) / static_cast<double>(p.size());
}

double correlation(std::span<const double> a, std::span<const double> b) {
  check_lengths(a.size(), b.size());
  const auto x = standardize(a, "first");
  const auto y = standardize(b, "second");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += x[i] * y[i];
  }
  return acc / static_cast<double>(x.size());
}

double mean_abs_diff(const ad::Tensor& a, const ad::Tensor& b) {
  if (a.size() != b.size() || a.size() == 0) {
    throw ConfigError("frames differ in size");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += std::abs(static_cast<double>(a[i]) - b[i]);
  }
  return acc / static_cast<double>(a.size());
}

double recon_accuracy(std::span<const ad::Tensor> original, std::span<const ad::Tensor> recon) {
  if (original.size() != recon.size() || original.empty()) {
    throw ConfigError("reconstruction count does not match the frame count");
  }
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t f = 0; f < original.size(); ++f) {
    if (original[f].size() != recon[f].size()) {
      throw ConfigError("reconstruction " + std::to_string(f) + " has the wrong shape");
    }
    for (std::size_t i = 0; i < original[f].size(); ++i) {
      acc += std::abs(static_cast<double>(original[f][i]) - recon[f][i]);
    }
    n += original[f].size();
  }
  return 100.0 * (1.0 - acc / static_cast<double>(n));
}

ad::Tensor temporal_mean_frame(std::span<const ad::Tensor> frames) {
  if (frames.empty()) {
    throw ConfigError("no frames to average");
  }
  std::vector<double> acc(frames[0].size(), 0.0);
  for (const auto& f : frames) {
    if (!f.same_shape(frames[0])) {
      throw ConfigError("frames differ in shape");
    }
    for (std::size_t i = 0; i < acc.size(); ++i) {
      acc[i] += f[i];
    }
  }
  ad::Tensor out(frames[0].shape());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    out[i] = static_cast<float>(acc[i] / static_cast<double>(frames.size()));
  }
  return out;
}

}  // namespace anmvae::eval
