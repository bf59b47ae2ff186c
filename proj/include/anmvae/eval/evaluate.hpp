#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "anmvae/mechanism/expr.hpp"
#include "anmvae/scenes/dataset.hpp"
#include "anmvae/vae/model.hpp"

namespace anmvae::eval {

struct EvalReport {
  std::string mode;
  /// NaN when the encoder output has no variance over the video.
  double latent_mse = 0.0;
  bool degenerate_latent = false;
  double recon_accuracy = 0.0;
  std::vector<double> times;
  std::vector<double> predicted;  // posterior mean of the first latent
  std::vector<double> ground_truth;
};

/// Encoder outputs of every frame, in order.
std::vector<vae::EncoderOutput> encode_dataset(const vae::VaeCheckpoint& model,
                                               const scenes::VideoDataset& data);

/// Decodes the posterior mean of every frame (plus its time in temporal
/// mode); frames are [height, width, 3].
std::vector<ad::Tensor> reconstruct(const vae::VaeCheckpoint& model,
                                    const scenes::VideoDataset& data);

EvalReport evaluate(const vae::VaeCheckpoint& model, const scenes::VideoDataset& data);

/// `latent_mse=` / `recon_accuracy=` lines plus a summary.
std::string format_report(const EvalReport& report);
/// report.txt, report.csv (`metric,value`) and latents.csv
/// (`time,predicted,ground_truth`).
void write_report(const EvalReport& report, const std::filesystem::path& dir);
/// Reads the scalar fields of report.csv back.
EvalReport read_report_csv(const std::filesystem::path& path);

struct Intervention {
  std::vector<double> times;
  std::vector<double> latents;
  std::vector<ad::Tensor> frames;  // [height, width, 3]
};

/// Decodes y = mechanism(t) (noise-free) at each time. anm models only.
Intervention intervene(const vae::VaeCheckpoint& model, const mech::MechanismExpr& mechanism,
                       std::span<const double> times);

/// n evenly spaced times from low to high inclusive.
std::vector<double> uniform_times(double low, double high, std::size_t n);

/// Dataset layout (ground truth = intervened latent) plus latents.csv
/// (`time,y`).
void write_intervention(const Intervention& iv, const std::filesystem::path& dir);

}  // namespace anmvae::eval
