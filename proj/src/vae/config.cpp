#include "anmvae/vae/config.hpp"

#include <cmath>
#include <string>

#include "anmvae/errors.hpp"
#include "anmvae/mechanism/parser.hpp"
#include "anmvae/scenes/scene.hpp"

namespace anmvae::vae {

std::string_view kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Anm:
      return "anm";
    case ModelKind::Standard:
      return "standard";
    case ModelKind::Temporal:
      return "temporal";
  }
  return "?";
}

ModelKind kind_from_name(std::string_view name) {
  for (ModelKind k : {ModelKind::Anm, ModelKind::Standard, ModelKind::Temporal}) {
    if (kind_name(k) == name) {
      return k;
    }
  }
  throw ConfigError("unknown model mode '" + std::string(name) + "' (anm, standard, temporal)");
}

void VaeConfig::validate() const {
  if (width == 0 || height == 0) {
    throw ConfigError("model image dimensions must be positive");
  }
  if (latent_dim < 1 || hidden < 1) {
    throw ConfigError("latent_dim and hidden must be at least 1");
  }
  if (kind == ModelKind::Anm && latent_dim != 1) {
    throw ConfigError("anm mode has a single latent");
  }
  if (batch < 1) {
    throw ConfigError("batch size must be at least 1");
  }
  if (!std::isfinite(lr) || !(lr > 0.0)) {
    throw ConfigError("learning rate must be positive");
  }
  if (!std::isfinite(beta) || !(beta > 0.0)) {
    throw ConfigError("beta must be positive");
  }
  if (!std::isfinite(recon_weight) || recon_weight < 0.0) {
    throw ConfigError("recon_weight must be non-negative");
  }
  if (!std::isfinite(eps) || !(eps > 0.0)) {
    throw ConfigError("eps must be positive");
  }
  if (samples_per_component < 1) {
    throw ConfigError("samples_per_component must be at least 1");
  }
  if (kind == ModelKind::Anm) {
    if (!prior) {
      throw ConfigError("anm mode needs a prior");
    }
    prior->validate();
  }
}

prior::AnmPriorSpec prior_from_config(const ConfigText& cfg) {
  cfg.require_known_keys("prior", {"mechanism", "t_low", "t_high", "sigma_t", "sigma_n",
                                   "n_components", "seed"});
  prior::AnmPriorSpec p;
  if (cfg.has_section("scene")) {
    const auto scene = scenes::SceneSpec::from_config(cfg);
    p.mechanism = scene.mechanism;
    p.time = {scene.t_low, scene.t_high};
  }
  if (auto v = cfg.get("prior", "mechanism")) {
    try {
      p.mechanism = mech::parse(*v);
    } catch (const ParseError& e) {
      throw ConfigError(std::string("prior.mechanism: ") + e.what());
    }
  }
  if (auto v = cfg.get("prior", "t_low")) p.time.low = parse_real(*v, "prior.t_low");
  if (auto v = cfg.get("prior", "t_high")) p.time.high = parse_real(*v, "prior.t_high");
  if (auto v = cfg.get("prior", "sigma_t")) p.sigma_t = parse_real(*v, "prior.sigma_t");
  if (auto v = cfg.get("prior", "sigma_n")) p.sigma_n = parse_real(*v, "prior.sigma_n");
  if (auto v = cfg.get("prior", "n_components")) {
    p.n_components = parse_uint(*v, "prior.n_components");
  }
  if (auto v = cfg.get("prior", "seed")) p.seed = parse_uint(*v, "prior.seed");
  p.validate();
  return p;
}

void prior_to_config(const prior::AnmPriorSpec& p, ConfigText& cfg) {
  cfg.set("prior", "mechanism", p.mechanism.to_string());
  cfg.set("prior", "t_low", format_real(p.time.low));
  cfg.set("prior", "t_high", format_real(p.time.high));
  cfg.set("prior", "sigma_t", format_real(p.sigma_t));
  cfg.set("prior", "sigma_n", format_real(p.sigma_n));
  cfg.set("prior", "n_components", std::to_string(p.n_components));
  cfg.set("prior", "seed", std::to_string(p.seed));
}

VaeConfig VaeConfig::from_config(const ConfigText& cfg) {
  cfg.require_known_keys("model", {"mode", "width", "height", "latent_dim", "hidden", "lr",
                                   "batch", "beta", "recon_weight", "steps", "seed", "eps",
                                   "samples_per_component", "early_stop_window",
                                   "early_stop_tol", "resample_every"});
  VaeConfig c;
  if (cfg.has_section("scene")) {
    const auto scene = scenes::SceneSpec::from_config(cfg);
    c.width = scene.width;
    c.height = scene.height;
  }
  auto size = [&](const char* key, std::size_t& dst) {
    if (auto v = cfg.get("model", key)) dst = parse_uint(*v, std::string("model.") + key);
  };
  auto u64 = [&](const char* key, std::uint64_t& dst) {
    if (auto v = cfg.get("model", key)) dst = parse_uint(*v, std::string("model.") + key);
  };
  auto real = [&](const char* key, double& dst) {
    if (auto v = cfg.get("model", key)) dst = parse_real(*v, std::string("model.") + key);
  };
  if (auto v = cfg.get("model", "mode")) c.kind = kind_from_name(*v);
  size("width", c.width);
  size("height", c.height);
  size("latent_dim", c.latent_dim);
  size("hidden", c.hidden);
  real("lr", c.lr);
  size("batch", c.batch);
  real("beta", c.beta);
  real("recon_weight", c.recon_weight);
  u64("steps", c.steps);
  u64("seed", c.seed);
  real("eps", c.eps);
  size("samples_per_component", c.samples_per_component);
  size("early_stop_window", c.early_stop_window);
  real("early_stop_tol", c.early_stop_tol);
  u64("resample_every", c.resample_every);
  if (cfg.has_section("prior") || (c.kind == ModelKind::Anm && cfg.has_section("scene"))) {
    c.prior = prior_from_config(cfg);
  }
  c.validate();
  return c;
}

void VaeConfig::to_config(ConfigText& cfg) const {
  cfg.set("model", "mode", std::string(kind_name(kind)));
  cfg.set("model", "width", std::to_string(width));
  cfg.set("model", "height", std::to_string(height));
  cfg.set("model", "latent_dim", std::to_string(latent_dim));
  cfg.set("model", "hidden", std::to_string(hidden));
  cfg.set("model", "lr", format_real(lr));
  cfg.set("model", "batch", std::to_string(batch));
  cfg.set("model", "beta", format_real(beta));
  cfg.set("model", "recon_weight", format_real(recon_weight));
  cfg.set("model", "steps", std::to_string(steps));
  cfg.set("model", "seed", std::to_string(seed));
  cfg.set("model", "eps", format_real(eps));
  cfg.set("model", "samples_per_component", std::to_string(samples_per_component));
  cfg.set("model", "early_stop_window", std::to_string(early_stop_window));
  cfg.set("model", "early_stop_tol", format_real(early_stop_tol));
  cfg.set("model", "resample_every", std::to_string(resample_every));
  if (prior) {
    prior_to_config(*prior, cfg);
  }
}

}  // namespace anmvae::vae
