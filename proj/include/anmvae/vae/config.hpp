#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "anmvae/config_text.hpp"
#include "anmvae/prior/anm_prior.hpp"

namespace anmvae::vae {

/// anm: temporal ANM prior, decoder sees y only.
/// standard: N(0, 1) prior. temporal: N(0, 1) prior, decoder also sees t.
enum class ModelKind { Anm, Standard, Temporal };

std::string_view kind_name(ModelKind k);
ModelKind kind_from_name(std::string_view name);

struct VaeConfig {
  ModelKind kind = ModelKind::Anm;
  std::size_t width = 64;
  std::size_t height = 64;
  std::size_t latent_dim = 1;
  std::size_t hidden = 128;
  double lr = 3e-4;
  std::size_t batch = 100;
  double beta = 1.0;
  double recon_weight = 1.0;
  std::uint64_t steps = 20000;
  std::uint64_t seed = 0;
  /// Posterior spread along t.
  double eps = 0.01;
  std::size_t samples_per_component = 1;
  /// Stop once the mean total loss of the latest window differs from the
  /// previous window by less than `early_stop_tol` (relative). 0 disables.
  std::size_t early_stop_window = 500;
  double early_stop_tol = 1e-3;
  /// Rebuild the prior mixture with a new seed every this many steps; 0 keeps
  /// one mixture for the whole run.
  std::uint64_t resample_every = 0;
  /// Required in anm mode.
  std::optional<prior::AnmPriorSpec> prior;

  void validate() const;
  std::size_t pixel_count() const { return width * height * 3; }
  std::size_t encoder_output_width() const { return 2 * latent_dim; }
  std::size_t decoder_input_width() const {
    return latent_dim + (kind == ModelKind::Temporal ? 1 : 0);
  }

  /// Reads [model] and [prior]. A [prior] without a mechanism or time range
  /// takes them from [scene]; anm mode with no prior at all uses the scene
  /// mechanism with default noise settings.
  static VaeConfig from_config(const ConfigText& cfg);
  void to_config(ConfigText& cfg) const;
};

prior::AnmPriorSpec prior_from_config(const ConfigText& cfg);
void prior_to_config(const prior::AnmPriorSpec& spec, ConfigText& cfg);

}  // namespace anmvae::vae
