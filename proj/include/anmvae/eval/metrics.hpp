#pragma once

#include <span>
#include <vector>

#include "anmvae/autodiff/tensor.hpp"

namespace anmvae::eval {

/// Mean squared error after standardizing both series, minimized over a sign
/// flip of `pred`. Invariant to affine maps of either argument. Throws
/// NumericalDomainError when either series has zero variance (a collapsed
/// latent).
double latent_mse(std::span<const double> pred, std::span<const double> gt);

/// 100 * (1 - mean |x - x_hat|) over all pixels in [0, 1].
double recon_accuracy(std::span<const ad::Tensor> original, std::span<const ad::Tensor> recon);

/// Per-pixel mean over frames.
ad::Tensor temporal_mean_frame(std::span<const ad::Tensor> frames);

double mean_abs_diff(const ad::Tensor& a, const ad::Tensor& b);

/// Pearson correlation; throws NumericalDomainError on zero variance.
double correlation(std::span<const double> a, std::span<const double> b);

}  // namespace anmvae::eval
