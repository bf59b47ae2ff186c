#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace anmvae::testing {

/// A mechanism written three ways: as text, as a closed-form function, and
/// as its hand-derived derivative.
struct MechanismOracle {
  std::string text;
  std::function<double(double)> f;
  std::function<double(double)> df;
  double t_low;
  double t_high;
};

inline double gauss(double t, double mu, double s) {
  return std::exp(-(t - mu) * (t - mu) / (2 * s * s)) / (s * std::sqrt(2 * std::numbers::pi));
}
inline double dgauss(double t, double mu, double s) { return -(t - mu) / (s * s) * gauss(t, mu, s); }

inline std::vector<MechanismOracle> table_mechanisms() {
  using std::cos;
  using std::exp;
  using std::sin;
  const double pi = std::numbers::pi;
  return {
      {"cos(t)", [](double t) { return cos(t); }, [](double t) { return -sin(t); }, 0, 2 * pi},
      {"(1/3)*cos(2*t) - 2/3", [](double t) { return cos(2 * t) / 3 - 2.0 / 3; },
       [](double t) { return -2 * sin(2 * t) / 3; }, 0, 2 * pi},
      {"cos(t)", [](double t) { return cos(t); }, [](double t) { return -sin(t); }, 0, 2 * pi},
      {"exp(-t/(2*pi))*cos(t)", [pi](double t) { return exp(-t / (2 * pi)) * cos(t); },
       [pi](double t) { return exp(-t / (2 * pi)) * (-cos(t) / (2 * pi) - sin(t)); }, 0, 2 * pi},
      {"1 - t^2", [](double t) { return 1 - t * t; }, [](double t) { return -2 * t; }, 0, 1},
      {"max(0, 1 - 2.53*t^2)", [](double t) { return std::max(0.0, 1 - 2.53 * t * t); },
       [](double t) { return 1 - 2.53 * t * t > 0 ? -5.06 * t : 0.0; }, 0, 1},
      {"0.125*gausspdf(t; 0.055, 0.05) + 0.085*gausspdf(t; 0.5, 0.08)",
       [](double t) { return 0.125 * gauss(t, 0.055, 0.05) + 0.085 * gauss(t, 0.5, 0.08); },
       [](double t) { return 0.125 * dgauss(t, 0.055, 0.05) + 0.085 * dgauss(t, 0.5, 0.08); }, 0, 1},
      {"0.0193*gausspdf(t; 0.195, 0.007) + 0.006*gausspdf(t; 0.6, 0.008)",
       [](double t) { return 0.0193 * gauss(t, 0.195, 0.007) + 0.006 * gauss(t, 0.6, 0.008); },
       [](double t) { return 0.0193 * dgauss(t, 0.195, 0.007) + 0.006 * dgauss(t, 0.6, 0.008); },
       0, 1},
  };
}

/// |a - b| scaled by max(1, |b|).
inline double scaled_error(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

}  // namespace anmvae::testing
