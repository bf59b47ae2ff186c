#include "anmvae/vae/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <span>

#include "anmvae/autodiff/adam.hpp"
#include "anmvae/errors.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace anmvae::vae {
namespace {

constexpr std::uint64_t kShuffleStream = 1ull << 60;
constexpr std::uint64_t kNoiseStream = 2ull << 60;

bool finite(std::span<const ad::Tensor> grads) {
  return std::all_of(grads.begin(), grads.end(), [](const ad::Tensor& g) { return g.all_finite(); });
}

std::vector<std::size_t> epoch_order(std::uint64_t seed, std::uint64_t epoch, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = substream(seed, kShuffleStream + epoch);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

double window_mean(std::span<const double> v, std::size_t end, std::size_t w) {
  double acc = 0.0;
  for (std::size_t i = end - w; i < end; ++i) {
    acc += v[i];
  }
  return acc / static_cast<double>(w);
}

// Minibatch activations are several MB each. By default glibc serves them
// with fresh mmaps, so every step pays for page faults; keep them on the heap.
void keep_large_blocks_on_heap() {
#if defined(__GLIBC__)
  static const bool done = [] {
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
    return true;
  }();
  (void)done;
#endif
}

}  // namespace

bool early_stop_reached(std::span<const double> totals, std::size_t window, double tol) {
  const std::size_t n = totals.size();
  if (window == 0 || n < 2 * window || n % window != 0) {
    return false;
  }
  const double prev = window_mean(totals, n - window, window);
  const double cur = window_mean(totals, n, window);
  // A window that got worse is a transient, not convergence.
  return std::abs(prev - cur) < tol * std::abs(prev);
}

gmm::Gmm prior_at_step(const VaeConfig& config, std::uint64_t step) {
  if (!config.prior) {
    throw ConfigError("model has no prior");
  }
  prior::AnmPriorSpec spec = *config.prior;
  if (config.resample_every > 0) {
    spec.seed += step / config.resample_every;
  }
  return prior::build_prior_gmm(spec);
}

VaeCheckpoint train(const VaeConfig& config, const scenes::VideoDataset& data,
                    const TrainOptions& options, const VaeCheckpoint* resume) {
  config.validate();
  data.validate();
  keep_large_blocks_on_heap();
  if (data.width != config.width || data.height != config.height) {
    throw ConfigError("dataset is " + std::to_string(data.width) + "x" +
                      std::to_string(data.height) + " but the model expects " +
                      std::to_string(config.width) + "x" + std::to_string(config.height));
  }
  VaeCheckpoint model = resume ? *resume : VaeCheckpoint::init(config);
  if (resume) {
    if (resume->config.kind != config.kind || resume->config.width != config.width ||
        resume->config.height != config.height || resume->config.hidden != config.hidden ||
        resume->config.latent_dim != config.latent_dim) {
      throw ConfigError("checkpoint architecture does not match the training config");
    }
    model.config = config;
    model.stopped_early = false;
  }

  std::ofstream metrics;
  if (options.metrics_path) {
    const bool append = resume != nullptr && std::filesystem::exists(*options.metrics_path);
    metrics.open(*options.metrics_path, append ? std::ios::app : std::ios::trunc);
    if (!metrics) {
      throw IoError("cannot write metrics to '" + options.metrics_path->string() + "'");
    }
    if (!append) {
      metrics << "step,recon,kl,total\n";
    }
  }

  const std::size_t T = data.size();
  const std::size_t P = data.pixel_count();
  const std::size_t B = std::min(config.batch, T);
  const std::size_t per_epoch = (T + B - 1) / B;
  const ad::Tensor all = data.frame_matrix();

  std::optional<gmm::Gmm> prior;
  std::uint64_t prior_epoch = ~0ull;

  auto enc_params = model.encoder.tensors();
  auto dec_params = model.decoder.tensors();
  std::vector<ad::Tensor*> params(enc_params);
  params.insert(params.end(), dec_params.begin(), dec_params.end());
  std::vector<const ad::Tensor*> layout(params.begin(), params.end());
  ad::AdamState adam({config.lr}, layout);

  std::vector<double> totals;
  std::vector<std::size_t> order;
  std::uint64_t order_epoch = ~0ull;
  std::uint64_t skipped_run = 0;

  for (std::uint64_t step = model.step; step < config.steps; ++step) {
    const std::uint64_t epoch = step / per_epoch;
    if (epoch != order_epoch) {
      order = epoch_order(config.seed, epoch, T);
      order_epoch = epoch;
    }
    const std::size_t first = static_cast<std::size_t>(step % per_epoch) * B;
    const std::size_t count = std::min(B, T - first);
    ad::Tensor frames({count, P});
    std::vector<double> times(count);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t k = order[first + i];
      std::copy_n(all.raw() + k * P, P, frames.raw() + i * P);
      times[i] = data.times[k];
    }

    if (config.kind == ModelKind::Anm) {
      const std::uint64_t pe = config.resample_every > 0 ? step / config.resample_every : 0;
      if (!prior || pe != prior_epoch) {
        prior = prior_at_step(config, step);
        prior_epoch = pe;
      }
    }

    Rng rng = substream(config.seed, kNoiseStream + step);
    StepRecord rec{step + 1, {}, false};
    try {
      ElboStep s = elbo_step(model, frames, times, prior ? &*prior : nullptr, rng);
      rec.losses = s.losses;
      std::vector<ad::Tensor> grads = std::move(s.encoder_grads);
      for (auto& g : s.decoder_grads) {
        grads.push_back(std::move(g));
      }
      if (!std::isfinite(s.losses.total) || !finite(grads)) {
        rec.skipped = true;
      } else {
        adam.apply(params, grads);
      }
    } catch (const NumericalDomainError&) {
      rec.skipped = true;
    }
    model.step = step + 1;
    if (options.on_step) {
      options.on_step(rec);
    }
    if (rec.skipped) {
      if (++skipped_run > options.max_skipped) {
        throw NumericalDomainError("training diverged: too many consecutive non-finite steps",
                                   rec.losses.total);
      }
      continue;
    }
    skipped_run = 0;
    model.losses = rec.losses;
    if (metrics) {
      metrics << rec.step << ',' << format_real(rec.losses.recon) << ','
              << format_real(rec.losses.kl) << ',' << format_real(rec.losses.total) << '\n';
    }
    totals.push_back(rec.losses.total);
    if (early_stop_reached(totals, config.early_stop_window, config.early_stop_tol)) {
      model.stopped_early = true;
      break;
    }
  }
  if (metrics && !metrics.flush()) {
    throw IoError("failed writing metrics");
  }
  return model;
}

}  // namespace anmvae::vae
