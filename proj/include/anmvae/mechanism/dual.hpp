#pragma once

#include <cmath>

namespace anmvae::mech {

/// Forward-mode dual number: value and derivative with respect to t.
struct Dual {
  double value = 0.0;
  double deriv = 0.0;

  static constexpr Dual constant(double v) { return {v, 0.0}; }
  static constexpr Dual variable(double v) { return {v, 1.0}; }

  friend constexpr Dual operator+(Dual a, Dual b) { return {a.value + b.value, a.deriv + b.deriv}; }
  friend constexpr Dual operator-(Dual a, Dual b) { return {a.value - b.value, a.deriv - b.deriv}; }
  friend constexpr Dual operator-(Dual a) { return {-a.value, -a.deriv}; }
  friend constexpr Dual operator*(Dual a, Dual b) {
    return {a.value * b.value, a.deriv * b.value + a.value * b.deriv};
  }
  // callers check b.value != 0
  friend constexpr Dual operator/(Dual a, Dual b) {
    return {a.value / b.value, (a.deriv * b.value - a.value * b.deriv) / (b.value * b.value)};
  }
};

inline Dual cos(Dual a) { return {std::cos(a.value), -std::sin(a.value) * a.deriv}; }
inline Dual sin(Dual a) { return {std::sin(a.value), std::cos(a.value) * a.deriv}; }
inline Dual exp(Dual a) {
  const double e = std::exp(a.value);
  return {e, e * a.deriv};
}

}  // namespace anmvae::mech
