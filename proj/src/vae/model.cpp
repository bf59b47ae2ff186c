#include "anmvae/vae/model.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "anmvae/autodiff/ops.hpp"
#include "anmvae/errors.hpp"

namespace anmvae::vae {

using ad::Tensor;
using ad::Var;

namespace {

// Fixed substream ids derived from the model seed.
constexpr std::uint64_t kInitStream = 0x1717;

Tensor as_batch(const Tensor& frames, std::size_t width) {
  if (frames.rank() == 2) {
    return frames;
  }
  if (frames.size() % width != 0 || frames.size() == 0) {
    throw ConfigError("frame data of size " + std::to_string(frames.size()) +
                      " does not match the encoder input width " + std::to_string(width));
  }
  return Tensor({frames.size() / width, width}, std::vector<float>(frames.data().begin(),
                                                                   frames.data().end()));
}

Var columns(Var a, std::size_t first, std::size_t count) {
  std::vector<Var> cols;
  for (std::size_t j = 0; j < count; ++j) {
    cols.push_back(ad::column(a, first + j));
  }
  return ad::stack_columns(cols);
}

Tensor to_tensor(std::span<const double> v) {
  std::vector<float> f(v.begin(), v.end());
  return Tensor::vector(std::move(f));
}

}  // namespace

VaeCheckpoint VaeCheckpoint::init(const VaeConfig& config) {
  config.validate();
  VaeCheckpoint ck;
  ck.config = config;
  Rng rng = substream(config.seed, kInitStream);
  const auto enc = ad::standard_widths(config.pixel_count(), config.encoder_output_width(),
                                       config.hidden);
  const auto dec = ad::standard_widths(config.decoder_input_width(), config.pixel_count(),
                                       config.hidden);
  ck.encoder = ad::MlpParams::init(enc, rng);
  ck.decoder = ad::MlpParams::init(dec, rng);
  return ck;
}

EncodedVars encode(const ad::BoundMlp& enc, Var frames, std::size_t latent_dim) {
  Var raw = enc.forward(frames);
  if (raw.value().cols() != 2 * latent_dim) {
    throw ConfigError("encoder output width does not match the latent dimension");
  }
  Var mu = columns(raw, 0, latent_dim);
  Var sigma = ad::clamp(ad::exp(columns(raw, latent_dim, latent_dim)), kSigmaMin, kSigmaMax);
  return {mu, sigma};
}

Var decode(const ad::BoundMlp& dec, Var latents) { return ad::logistic(dec.forward(latents)); }

std::vector<EncoderOutput> encode(const VaeCheckpoint& model, const Tensor& frames) {
  ad::Graph g;
  ad::BoundMlp enc(g, model.encoder);
  const Tensor batch = as_batch(frames, model.encoder.input_width());
  EncodedVars e = encode(enc, g.constant(batch), model.config.latent_dim);
  const Tensor& mu = e.mu.value();
  const Tensor& sigma = e.sigma.value();
  std::vector<EncoderOutput> out(mu.rows());
  for (std::size_t b = 0; b < mu.rows(); ++b) {
    for (std::size_t l = 0; l < mu.cols(); ++l) {
      out[b].mu.push_back(mu.at(b, l));
      out[b].sigma.push_back(sigma.at(b, l));
    }
  }
  return out;
}

Tensor decode(const VaeCheckpoint& model, const Tensor& latents, std::span<const double> times) {
  const std::size_t L = model.config.latent_dim;
  const Tensor z = as_batch(latents, L);
  if (z.cols() != L) {
    throw ConfigError("latent batch must have " + std::to_string(L) + " columns");
  }
  Tensor input = z;
  if (model.config.kind == ModelKind::Temporal) {
    if (times.size() != z.rows()) {
      throw ConfigError("temporal decoding needs one time per latent");
    }
    input = Tensor({z.rows(), L + 1});
    for (std::size_t b = 0; b < z.rows(); ++b) {
      for (std::size_t l = 0; l < L; ++l) {
        input.at(b, l) = z.at(b, l);
      }
      input.at(b, L) = static_cast<float>(times[b]);
    }
  }
  ad::Graph g;
  ad::BoundMlp dec(g, model.decoder);
  return decode(dec, g.constant(std::move(input))).value();
}

gmm::Gmm build_posterior_gmm(std::span<const EncoderOutput> outputs, std::span<const double> times,
                             double eps) {
  if (outputs.size() != times.size()) {
    throw ConfigError("posterior needs one time per encoded frame");
  }
  std::vector<gmm::Gaussian2> comps;
  comps.reserve(outputs.size());
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const double s = outputs[i].sigma.at(0);
    gmm::Mat2 cov;
    cov << eps * eps, 0.0, 0.0, s * s;
    comps.push_back(gmm::Gaussian2::make(gmm::Vec2(times[i], outputs[i].mu.at(0)), cov));
  }
  return gmm::Gmm(std::move(comps));
}

gmm::GmmVars posterior_vars(ad::Graph& graph, const EncodedVars& enc,
                            std::span<const double> times, double eps) {
  const std::size_t B = enc.mu.value().rows();
  if (times.size() != B) {
    throw ConfigError("posterior needs one time per encoded frame");
  }
  gmm::GmmVars q;
  q.mean_t = graph.constant(to_tensor(times));
  q.mean_y = ad::column(enc.mu, 0);
  q.cov_tt = graph.constant(Tensor({B}, static_cast<float>(eps * eps)));
  q.cov_ty = graph.constant(Tensor({B}, 0.0f));
  q.cov_yy = ad::square(ad::column(enc.sigma, 0));
  return q;
}

ElboNoise ElboNoise::draw(const VaeConfig& config, std::size_t batch, Rng& rng) {
  std::normal_distribution<double> normal;
  auto fill = [&](Tensor t) {
    for (float& v : t.data()) {
      v = static_cast<float>(normal(rng));
    }
    return t;
  };
  ElboNoise n;
  if (config.kind == ModelKind::Anm) {
    const std::size_t count = config.samples_per_component * batch;
    n.eta_t = fill(Tensor({count}));
    n.eta_y = fill(Tensor({count}));
  } else {
    n.eta_y = fill(Tensor({batch, config.latent_dim}));
  }
  return n;
}

ElboVars elbo(ad::Graph& graph, const VaeConfig& config, const ad::BoundMlp& enc,
              const ad::BoundMlp& dec, const Tensor& frames, std::span<const double> times,
              const gmm::Gmm* prior, const ElboNoise& noise) {
  const Tensor batch = as_batch(frames, config.pixel_count());
  const std::size_t B = batch.rows();
  if (B == 0) {
    throw ConfigError("empty minibatch");
  }
  if (times.size() != B) {
    throw ConfigError("minibatch needs one time per frame");
  }
  Var x = graph.constant(batch);
  EncodedVars e = encode(enc, x, config.latent_dim);

  Var kl;
  Var latents;
  if (config.kind == ModelKind::Anm) {
    if (prior == nullptr) {
      throw ConfigError("anm mode needs a prior mixture");
    }
    gmm::GmmVars q = posterior_vars(graph, e, times, config.eps);
    gmm::SampleVars s = gmm::reparameterized_sample(q, noise.eta_t, noise.eta_y);
    kl = gmm::kl_mc_at(q, *prior, s);
    // Only the y coordinate of the first draw per frame reaches the decoder.
    std::vector<std::size_t> first(B);
    std::iota(first.begin(), first.end(), 0);
    latents = ad::reshape(ad::gather(s.x_y, first), {B, 1});
  } else {
    if (noise.eta_y.shape() != std::vector<std::size_t>{B, config.latent_dim}) {
      throw ConfigError("baseline noise must be [batch, latent_dim]");
    }
    latents = e.mu + e.sigma * graph.constant(noise.eta_y);
    Var terms = ad::square(e.mu) + ad::square(e.sigma) - ad::scale(ad::log(e.sigma), 2.0);
    kl = ad::add_scalar(ad::scale(ad::sum(terms), 0.5 / static_cast<double>(B)),
                        -0.5 * static_cast<double>(config.latent_dim));
    if (config.kind == ModelKind::Temporal) {
      std::vector<Var> cols;
      for (std::size_t l = 0; l < config.latent_dim; ++l) {
        cols.push_back(ad::column(latents, l));
      }
      cols.push_back(graph.constant(to_tensor(times)));
      latents = ad::stack_columns(cols);
    }
  }

  Var xhat = decode(dec, latents);
  Var recon = ad::scale(ad::squared_error(xhat, x), 0.5 / static_cast<double>(B));
  Var total = ad::scale(recon, config.recon_weight) + ad::scale(kl, config.beta);
  return {recon, kl, total, xhat};
}

ElboStep elbo_step(const VaeCheckpoint& model, const Tensor& frames, std::span<const double> times,
                   const gmm::Gmm* prior, const ElboNoise& noise) {
  ad::Graph g;
  ad::BoundMlp enc(g, model.encoder);
  ad::BoundMlp dec(g, model.decoder);
  ElboVars v = elbo(g, model.config, enc, dec, frames, times, prior, noise);
  g.backward(v.total);
  ElboStep out;
  out.losses = {v.recon.value().item(), v.kl.value().item(), v.total.value().item()};
  out.encoder_grads = enc.gradients();
  out.decoder_grads = dec.gradients();
  return out;
}

ElboStep elbo_step(const VaeCheckpoint& model, const Tensor& frames, std::span<const double> times,
                   const gmm::Gmm* prior, Rng& rng) {
  const std::size_t B = frames.rank() == 2 ? frames.rows() : 1;
  return elbo_step(model, frames, times, prior, ElboNoise::draw(model.config, B, rng));
}

}  // namespace anmvae::vae
