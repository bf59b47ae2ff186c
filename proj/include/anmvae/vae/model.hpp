#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "anmvae/autodiff/graph.hpp"
#include "anmvae/autodiff/mlp.hpp"
#include "anmvae/gmm/gmm.hpp"
#include "anmvae/gmm/graph_ops.hpp"
#include "anmvae/random.hpp"
#include "anmvae/vae/config.hpp"

namespace anmvae::vae {

/// sigma = exp(raw) clamped into this range.
inline constexpr float kSigmaMin = 1e-4f;
inline constexpr float kSigmaMax = 10.0f;

struct StepLosses {
  double recon = 0.0;
  double kl = 0.0;
  double total = 0.0;
};

/// Trained (or freshly initialised) model plus its provenance.
struct VaeCheckpoint {
  VaeConfig config;
  ad::MlpParams encoder;
  ad::MlpParams decoder;
  std::uint64_t step = 0;
  StepLosses losses;
  bool stopped_early = false;

  /// Glorot-initialised networks from `config.seed`.
  static VaeCheckpoint init(const VaeConfig& config);
};

/// Per-frame posterior parameters over the latent dims.
struct EncoderOutput {
  std::vector<double> mu;
  std::vector<double> sigma;
};

/// Encoder forward on a graph: frames [B, P] -> (mu, sigma), each [B, L].
struct EncodedVars {
  ad::Var mu;
  ad::Var sigma;
};
EncodedVars encode(const ad::BoundMlp& enc, ad::Var frames, std::size_t latent_dim);

/// Decoder forward on a graph: latents [B, L] (+ a t column in temporal mode)
/// -> logistic pixels [B, P].
ad::Var decode(const ad::BoundMlp& dec, ad::Var latents);

/// Plain-value wrappers; `frames` is [B, P] or a single flattened frame.
std::vector<EncoderOutput> encode(const VaeCheckpoint& model, const ad::Tensor& frames);
/// `latents` is [B, L]; `times` is used in temporal mode only.
ad::Tensor decode(const VaeCheckpoint& model, const ad::Tensor& latents,
                  std::span<const double> times = {});

/// One component per frame: mean (t, mu_y), cov diag(eps^2, sigma_y^2).
gmm::Gmm build_posterior_gmm(std::span<const EncoderOutput> outputs, std::span<const double> times,
                             double eps);
/// Same mixture as graph variables.
gmm::GmmVars posterior_vars(ad::Graph& graph, const EncodedVars& enc,
                            std::span<const double> times, double eps);

/// Standard-normal draws for one minibatch. anm mode uses eta_t/eta_y of
/// length samples_per_component * B; baselines use eta_y as [B, L].
struct ElboNoise {
  ad::Tensor eta_t;
  ad::Tensor eta_y;

  static ElboNoise draw(const VaeConfig& config, std::size_t batch, Rng& rng);
};

struct ElboVars {
  ad::Var recon;
  ad::Var kl;
  ad::Var total;
  ad::Var reconstruction;  // [B, P]
};

/// recon = (1/B) sum_b 1/2 ||x_b - x_hat_b||^2. kl is the Monte-Carlo mixture
/// KL to `prior` (anm) or the closed-form N(0, 1) KL averaged over the
/// batch. total = recon_weight * recon + beta * kl.
ElboVars elbo(ad::Graph& graph, const VaeConfig& config, const ad::BoundMlp& enc,
              const ad::BoundMlp& dec, const ad::Tensor& frames, std::span<const double> times,
              const gmm::Gmm* prior, const ElboNoise& noise);

/// Losses and parameter gradients of one minibatch.
struct ElboStep {
  StepLosses losses;
  std::vector<ad::Tensor> encoder_grads;
  std::vector<ad::Tensor> decoder_grads;
};
ElboStep elbo_step(const VaeCheckpoint& model, const ad::Tensor& frames,
                   std::span<const double> times, const gmm::Gmm* prior, const ElboNoise& noise);
ElboStep elbo_step(const VaeCheckpoint& model, const ad::Tensor& frames,
                   std::span<const double> times, const gmm::Gmm* prior, Rng& rng);

}  // namespace anmvae::vae
