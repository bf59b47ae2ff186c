#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>

#include "anmvae/scenes/dataset.hpp"
#include "anmvae/vae/model.hpp"

namespace anmvae::vae {

struct StepRecord {
  std::uint64_t step = 0;
  StepLosses losses;
  bool skipped = false;
};

struct TrainOptions {
  /// CSV `step,recon,kl,total`, one row per applied step. Appended to when
  /// resuming.
  std::optional<std::filesystem::path> metrics_path;
  std::function<void(const StepRecord&)> on_step;
  /// Consecutive non-finite steps tolerated before giving up.
  std::uint64_t max_skipped = 100;
};

/// Runs Adam until `config.steps` total steps (counting those already in
/// `resume`) or early stop. Minibatch order, noise and prior draws are pure
/// functions of (seed, step), so a resumed run sees the same data stream as
/// an uninterrupted one; optimizer moments restart from zero.
VaeCheckpoint train(const VaeConfig& config, const scenes::VideoDataset& data,
                    const TrainOptions& options = {}, const VaeCheckpoint* resume = nullptr);

/// True when `totals` ends on a multiple of `window` and the mean of its last
/// window differs from the one before by less than `tol` relative to it.
bool early_stop_reached(std::span<const double> totals, std::size_t window, double tol);

/// The prior mixture in effect at `step`.
gmm::Gmm prior_at_step(const VaeConfig& config, std::uint64_t step);

}  // namespace anmvae::vae
