#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "anmvae/errors.hpp"
#include "anmvae/eval/evaluate.hpp"
#include "anmvae/eval/metrics.hpp"
#include "anmvae/mechanism/parser.hpp"
#include "anmvae/vae/trainer.hpp"

using namespace anmvae;
using namespace anmvae::eval;
namespace fs = std::filesystem;

namespace {

std::vector<double> normal_series(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (double& x : v) {
    x = nd(rng);
  }
  return v;
}

ad::Tensor uniform_image(std::size_t h, std::size_t w, Rng& rng) {
  ad::Tensor t({h, w, 3});
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = u(rng);
  }
  return t;
}

vae::VaeConfig anm_config(std::size_t side) {
  vae::VaeConfig c;
  c.width = side;
  c.height = side;
  c.hidden = 16;
  c.batch = 20;
  c.seed = 7;
  prior::AnmPriorSpec p;
  p.mechanism = mech::parse("cos(t)");
  p.time.high = 2 * std::numbers::pi;
  p.n_components = 100;
  c.prior = p;
  return c;
}

scenes::VideoDataset spring(std::size_t side, std::size_t frames) {
  return scenes::generate_dataset(scenes::SceneSpec::preset(scenes::SceneKind::Spring, side, side, frames));
}

}  // namespace

TEST_CASE("latent mse of identical series is zero") {
  const auto gt = normal_series(50, 1);
  CHECK(latent_mse(gt, gt) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("latent mse ignores affine maps and sign") {
  const auto gt = normal_series(200, 2);
  std::vector<double> pred;
  for (double g : gt) {
    pred.push_back(-3.0 * g + 7.0);
  }
  CHECK(latent_mse(pred, gt) == doctest::Approx(0.0).epsilon(1e-10));
  const auto noisy = normal_series(200, 3);
  std::vector<double> mix, mapped;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    mix.push_back(gt[i] + 0.5 * noisy[i]);
    mapped.push_back(0.01 * (gt[i] + 0.5 * noisy[i]) - 40.0);
  }
  const double base = latent_mse(mix, gt);
  CHECK(base > 0.01);
  CHECK(latent_mse(mapped, gt) == doctest::Approx(base).epsilon(1e-9));
  std::vector<double> gt_mapped;
  for (double g : gt) {
    gt_mapped.push_back(5.0 * g + 1.0);
  }
  CHECK(latent_mse(mix, gt_mapped) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("latent mse is symmetric") {
  const auto a = normal_series(300, 4);
  auto b = normal_series(300, 5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    b[i] += a[i];
  }
  CHECK(latent_mse(a, b) == doctest::Approx(latent_mse(b, a)).epsilon(1e-12));
}

TEST_CASE("independent series score about two") {
  const auto a = normal_series(10000, 6);
  const auto b = normal_series(10000, 7);
  CHECK(latent_mse(a, b) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("latent mse rejects degenerate input") {
  const std::vector<double> flat(10, 3.0);
  const auto gt = normal_series(10, 8);
  CHECK_THROWS_AS(latent_mse(flat, gt), NumericalDomainError);
  CHECK_THROWS_AS(latent_mse(gt, flat), NumericalDomainError);
  CHECK_THROWS_AS(latent_mse(std::vector<double>{1.0}, std::vector<double>{2.0}), ConfigError);
  CHECK_THROWS_AS(latent_mse(gt, normal_series(9, 9)), ConfigError);
}

TEST_CASE("reconstruction accuracy extremes") {
  Rng rng(10);
  std::vector<ad::Tensor> x{uniform_image(4, 5, rng), uniform_image(4, 5, rng)};
  CHECK(recon_accuracy(x, x) == 100.0);
  std::vector<ad::Tensor> binary = x, flipped = x;
  for (std::size_t f = 0; f < binary.size(); ++f) {
    for (std::size_t i = 0; i < binary[f].size(); ++i) {
      binary[f][i] = binary[f][i] > 0.5f ? 1.0f : 0.0f;
      flipped[f][i] = 1.0f - binary[f][i];
    }
  }
  CHECK(recon_accuracy(binary, flipped) == doctest::Approx(0.0));
  std::vector<ad::Tensor> wrong{ad::Tensor({4, 4, 3}), ad::Tensor({4, 4, 3})};
  CHECK_THROWS_AS(recon_accuracy(x, wrong), ConfigError);
}

TEST_CASE("the mean frame scores below per-frame reconstructions") {
  const auto ds = spring(32, 60);
  const ad::Tensor mean = temporal_mean_frame(ds.frames);
  const std::vector<ad::Tensor> means(ds.size(), mean);
  CHECK(recon_accuracy(ds.frames, means) < recon_accuracy(ds.frames, ds.frames));
  // Rerendering from the noiseless latent is a per-frame reconstruction.
  std::vector<ad::Tensor> rerender;
  const auto spec = scenes::SceneSpec::preset(scenes::SceneKind::Spring, 32, 32, 60);
  for (double y : ds.ground_truth) {
    rerender.push_back(scenes::render_value(spec, y).pixels);
  }
  CHECK(recon_accuracy(ds.frames, means) < recon_accuracy(ds.frames, rerender));
}

TEST_CASE("added noise never raises reconstruction accuracy") {
  Rng rng(11);
  const std::vector<ad::Tensor> x{uniform_image(8, 8, rng), uniform_image(8, 8, rng)};
  std::vector<ad::Tensor> xhat = x;
  std::uniform_real_distribution<float> jitter(-0.03f, 0.03f);
  for (auto& f : xhat) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = std::clamp(f[i] + jitter(rng), 0.0f, 1.0f);
    }
  }
  const double clean = recon_accuracy(x, xhat);
  std::uniform_real_distribution<float> noise(-0.1f, 0.1f);
  int raised = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ad::Tensor> noisy = xhat;
    for (auto& f : noisy) {
      for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = std::clamp(f[i] + noise(rng), 0.0f, 1.0f);
      }
    }
    raised += recon_accuracy(x, noisy) > clean;
  }
  // Under the null "noise is harmless" about half the trials would rise;
  // zero rises out of 20 rejects it far below 0.01.
  CHECK(raised == 0);
}

TEST_CASE("temporal mean frame and correlation") {
  ad::Tensor a({1, 1, 3}), b({1, 1, 3});
  a.fill(0.2f);
  b.fill(0.6f);
  const std::vector<ad::Tensor> frames{a, b};
  CHECK(temporal_mean_frame(frames)[0] == doctest::Approx(0.4f));
  CHECK(mean_abs_diff(a, b) == doctest::Approx(0.4));
  const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8.5};
  CHECK(correlation(x, y) > 0.99);
  CHECK(correlation(x, std::vector<double>{4, 3, 2, 1}) == doctest::Approx(-1.0));
}

TEST_CASE("untrained model yields a well formed report") {
  const auto ds = spring(16, 100);
  const auto model = vae::VaeCheckpoint::init(anm_config(16));
  const auto r = evaluate(model, ds);
  CHECK(r.mode == "anm");
  CHECK(r.predicted.size() == 100);
  CHECK(r.ground_truth == ds.ground_truth);
  CHECK(r.times == ds.times);
  CHECK_FALSE(r.degenerate_latent);
  CHECK(r.latent_mse >= 0.0);
  CHECK(r.latent_mse <= 4.0);
  CHECK(r.recon_accuracy >= 0.0);
  CHECK(r.recon_accuracy <= 100.0);
  const std::string text = format_report(r);
  CHECK(text.find("latent_mse=") != std::string::npos);
  CHECK(text.find("recon_accuracy=") != std::string::npos);
}

TEST_CASE("a collapsed encoder is reported as degenerate") {
  const auto ds = spring(16, 20);
  auto model = vae::VaeCheckpoint::init(anm_config(16));
  model.encoder = ad::MlpParams::zeros(model.encoder.widths());
  const auto r = evaluate(model, ds);
  CHECK(r.degenerate_latent);
  CHECK(std::isnan(r.latent_mse));
  CHECK(format_report(r).find("collapsed") != std::string::npos);
}

TEST_CASE("report round trips through csv") {
  const auto ds = spring(16, 30);
  const auto r = evaluate(vae::VaeCheckpoint::init(anm_config(16)), ds);
  const fs::path dir = fs::temp_directory_path() / "anmvae_test_report";
  fs::remove_all(dir);
  write_report(r, dir);
  CHECK(fs::exists(dir / "report.txt"));
  CHECK(fs::exists(dir / "latents.csv"));
  const auto back = read_report_csv(dir / "report.csv");
  CHECK(back.mode == r.mode);
  CHECK(back.latent_mse == r.latent_mse);
  CHECK(back.recon_accuracy == r.recon_accuracy);
  CHECK(back.degenerate_latent == r.degenerate_latent);
  std::ifstream latents(dir / "latents.csv");
  std::string line;
  std::getline(latents, line);
  CHECK(line == "time,predicted,ground_truth");
  std::size_t rows = 0;
  while (std::getline(latents, line)) {
    ++rows;
  }
  CHECK(rows == 30);
  fs::remove_all(dir);
}

TEST_CASE("intervention decodes the noiseless mechanism") {
  const auto model = vae::VaeCheckpoint::init(anm_config(16));
  const auto mech = mech::parse("cos(2*t)/3 - 2/3");
  const auto times = uniform_times(0.0, 2 * std::numbers::pi, 25);
  CHECK(times.front() == 0.0);
  CHECK(times.back() == doctest::Approx(2 * std::numbers::pi));
  const auto iv = intervene(model, mech, times);
  REQUIRE(iv.frames.size() == 25);
  for (std::size_t k = 0; k < times.size(); ++k) {
    CHECK(iv.latents[k] == mech.eval(times[k]));
  }
  ad::Tensor latents({1, 1});
  latents[0] = static_cast<float>(iv.latents[3]);
  const auto direct = vae::decode(model, latents);
  for (std::size_t i = 0; i < direct.size(); ++i) {
    REQUIRE(direct[i] == doctest::Approx(iv.frames[3][i]).epsilon(1e-5));
  }
  CHECK(iv.frames[3].shape() == std::vector<std::size_t>{16, 16, 3});
}

TEST_CASE("intervention outside the training range stays in range") {
  const auto model = vae::VaeCheckpoint::init(anm_config(16));
  const auto iv = intervene(model, mech::parse("40*t - 100"), uniform_times(-10.0, 50.0, 30));
  for (const auto& f : iv.frames) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      REQUIRE(f[i] >= 0.0f);
      REQUIRE(f[i] <= 1.0f);
    }
  }
}

TEST_CASE("intervention needs an anm model") {
  auto cfg = anm_config(16);
  cfg.kind = vae::ModelKind::Standard;
  cfg.prior.reset();
  CHECK_THROWS_AS(intervene(vae::VaeCheckpoint::init(cfg), mech::parse("t"), uniform_times(0, 1, 3)),
                  ConfigError);
}

TEST_CASE("intervention output layout") {
  const auto model = vae::VaeCheckpoint::init(anm_config(16));
  const auto iv = intervene(model, mech::parse("max(0, 1 - 2.53*t^2)"), uniform_times(0, 1, 5));
  const fs::path dir = fs::temp_directory_path() / "anmvae_test_intervention";
  fs::remove_all(dir);
  write_intervention(iv, dir);
  const auto back = scenes::read_dataset(dir);
  CHECK(back.size() == 5);
  CHECK(back.ground_truth[4] == 0.0);
  std::ifstream latents(dir / "latents.csv");
  std::string line;
  std::getline(latents, line);
  CHECK(line == "time,y");
  fs::remove_all(dir);
}

TEST_CASE("identity intervention matches reconstructions of a trained model") {
  auto cfg = anm_config(16);
  cfg.steps = 1500;
  cfg.lr = 1e-3;
  const auto ds = spring(16, 100);
  const auto model = vae::train(cfg, ds);
  const auto recon = reconstruct(model, ds);
  const auto iv = intervene(model, cfg.prior->mechanism, ds.times);
  double worst = 0, total = 0;
  for (std::size_t k = 0; k < ds.size(); ++k) {
    const double d = mean_abs_diff(recon[k], iv.frames[k]);
    worst = std::max(worst, d);
    total += d;
  }
  CHECK(total / static_cast<double>(ds.size()) < 0.05);
  MESSAGE("identity intervention mean abs diff ", total / ds.size(), " worst ", worst);
}
