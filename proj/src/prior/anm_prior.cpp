#include "anmvae/prior/anm_prior.hpp"

#include <cmath>
#include <string>

#include "anmvae/errors.hpp"

namespace anmvae::prior {

void TimeDistribution::validate() const {
  if (!std::isfinite(low) || !std::isfinite(high) || !(low < high)) {
    throw ConfigError("time distribution needs finite low < high, got [" + std::to_string(low) +
                      ", " + std::to_string(high) + "]");
  }
}

double TimeDistribution::sample(Rng& rng) const {
  return std::uniform_real_distribution<double>(low, high)(rng);
}

void AnmPriorSpec::validate() const {
  if (mechanism.empty()) {
    throw ConfigError("prior has no mechanism");
  }
  time.validate();
  if (!std::isfinite(sigma_t) || !(sigma_t > 0.0)) {
    throw ConfigError("sigma_t must be finite and positive");
  }
  if (!std::isfinite(sigma_n) || !(sigma_n > 0.0)) {
    throw ConfigError("sigma_n must be finite and positive");
  }
  if (n_components < 1) {
    throw ConfigError("prior needs at least one component");
  }
}

gmm::Gaussian2 linearize_component(const mech::MechanismExpr& mech, double t0, double n0,
                                   double sigma_t, double sigma_n) {
  if (!std::isfinite(t0) || !std::isfinite(n0) || !std::isfinite(sigma_t) ||
      !std::isfinite(sigma_n)) {
    throw ConfigError("linearization inputs must be finite");
  }
  const mech::Dual f = mech.eval_dual(t0);
  const double st2 = sigma_t * sigma_t;
  gmm::Vec2 mean(t0, f.value + n0);
  gmm::Mat2 cov;
  cov << st2, f.deriv * st2, f.deriv * st2, f.deriv * f.deriv * st2 + sigma_n * sigma_n;
  return gmm::Gaussian2::make(mean, cov);
}

gmm::Gmm build_prior_gmm(const AnmPriorSpec& spec) {
  spec.validate();
  std::vector<gmm::Gaussian2> comps;
  comps.reserve(spec.n_components);
  for (std::size_t j = 0; j < spec.n_components; ++j) {
    Rng rng = substream(spec.seed, j);
    const double t0 = spec.time.sample(rng);
    const double n0 = std::normal_distribution<double>(0.0, spec.sigma_n)(rng);
    comps.push_back(linearize_component(spec.mechanism, t0, n0, spec.sigma_t, spec.sigma_n));
  }
  return gmm::Gmm(std::move(comps));
}

std::vector<gmm::Vec2> exact_anm_sample(const AnmPriorSpec& spec, Rng& rng, std::size_t count) {
  spec.validate();
  if (count == 0) {
    throw ConfigError("sample count must be at least 1");
  }
  std::normal_distribution<double> noise(0.0, spec.sigma_n);
  std::vector<gmm::Vec2> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = spec.time.sample(rng);
    const double n = noise(rng);
    out.emplace_back(t, spec.mechanism.eval(t) + n);
  }
  return out;
}

}  // namespace anmvae::prior
