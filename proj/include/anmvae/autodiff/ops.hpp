#pragma once

#include <cstddef>
#include <span>

#include "anmvae/autodiff/graph.hpp"

// Differentiable operations recorded on a Graph. Elementwise binary ops
// require identical shapes; there is no general broadcasting. Reductions
// accumulate in double.
namespace anmvae::ad {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var neg(Var a);
Var exp(Var a);
Var log(Var a);
Var sqrt(Var a);
Var square(Var a);
Var relu(Var a);
Var logistic(Var a);
/// Clamp into [lo, hi]; the gradient is zero where the clamp is active.
Var clamp(Var a, float lo, float hi);
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);

/// Sum of all elements -> scalar.
Var sum(Var a);
Var mean(Var a);
/// [rows, cols] -> [rows], summing each row.
Var sum_rows(Var a);

/// [m, k] x [k, n] -> [m, n].
Var matmul(Var a, Var b);
/// [m, n] x [n] -> [m].
Var matvec(Var a, Var x);
/// [rows, n] + [n] added to every row.
Var add_rowvec(Var a, Var row);
/// x [batch, in] * w [in, out] + b [out].
Var linear(Var x, Var w, Var b);
/// Sum of (a - b)^2 over all elements -> scalar.
Var squared_error(Var a, Var b);

/// Column `j` of a rank-2 tensor -> [rows].
Var column(Var a, std::size_t j);
/// Stack equal-length vectors as the columns of a [rows, k] matrix.
Var stack_columns(std::span<const Var> columns);
/// out[i] = a[indices[i]] on the flattened input.
Var gather(Var a, std::span<const std::size_t> indices);
Var reshape(Var a, std::vector<std::size_t> shape);

/// m + ln sum exp(v_i - m), m = max v_i, over a non-empty vector -> scalar.
Var logsumexp(Var v);
/// Row-wise logsumexp: [rows, n] -> [rows].
Var logsumexp_rows(Var a);

/// ln det of a 2x2 SPD matrix. Throws NumericalDomainError on det <= 1e-30.
Var logdet2x2(Var a);
/// Inverse of a 2x2 SPD matrix, closed form.
Var inverse2x2(Var a);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator/(Var a, Var b) { return div(a, b); }
inline Var operator-(Var a) { return neg(a); }

/// Determinant floor below which a 2x2 covariance is treated as singular.
inline constexpr double kMinDeterminant = 1e-30;

}  // namespace anmvae::ad
