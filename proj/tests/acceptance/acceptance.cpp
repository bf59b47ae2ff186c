// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Optional argv[1]: directory for artifacts
// (datasets, checkpoints, reports); defaults to a temporary directory.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "anmvae/cli/commands.hpp"
#include "anmvae/eval/evaluate.hpp"
#include "anmvae/eval/metrics.hpp"
#include "anmvae/mechanism/builtins.hpp"
#include "anmvae/mechanism/parser.hpp"
#include "anmvae/prior/anm_prior.hpp"
#include "anmvae/scenes/dataset.hpp"
#include "anmvae/vae/checkpoint.hpp"
#include "anmvae/vae/trainer.hpp"
#include "../support/elbo_check.hpp"
#include "../support/gmm_oracle.hpp"
#include "../support/kde_oracle.hpp"
#include "../support/mechanism_oracle.hpp"
#include "../support/op_cases.hpp"

using namespace anmvae;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr std::size_t kKlPairs = 20;
constexpr std::size_t kKlSamples = 100000;
constexpr double kKlStdErrors = 3.0;
constexpr double kKlSeconds = 5.0;
constexpr double kFarSigmas = 50.0;
constexpr double kFarTolerance = 1e-6;
constexpr std::size_t kPriorComponents = 2000;
constexpr std::size_t kPriorSamples = 10000;
constexpr double kPriorNats = 0.5;
constexpr double kCovTolerance = 1e-12;
constexpr double kGradTolerance = 1e-2;
constexpr double kGradSeconds = 60.0;
constexpr double kAnmLatentMse = 0.01;
constexpr double kStandardLatentLow = 1.5;
constexpr double kStandardLatentHigh = 2.5;
constexpr double kMeanFrameDistance = 0.02;
constexpr double kSpringCorrelation = 0.95;
constexpr double kFallGroundTime = 0.6289;
constexpr double kGroundRowTolerance = 1.0;  // pixel rows
constexpr double kFallTimeTolerance = 0.05;
constexpr std::size_t kParserPoints = 1000;
constexpr double kParserTolerance = 1e-9;
constexpr std::size_t kSeriesLength = 10000;
constexpr double kSeriesTolerance = 0.1;
constexpr std::uint64_t kPipelineSteps = 200;

const fs::path kConfigs = ANMVAE_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Monte-Carlo KL of single Gaussians against the closed form.
Outcome kl_kernel() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = 0.0;
  for (std::size_t i = 0; i < kKlPairs; ++i) {
    const auto a = testing::random_gaussian(rng), b = testing::random_gaussian(rng);
    const auto est = gmm::kl_mc(gmm::Gmm({a}), gmm::Gmm({b}), kKlSamples, rng);
    const double exact = gmm::closed_form_gaussian_kl(a, b);
    if (std::abs(exact - testing::gaussian_kl(a, b)) > 1e-10 * std::max(1.0, exact)) {
      return {false, "closed form disagrees with the textbook formula"};
    }
    worst = std::max(worst, std::abs(est.value - exact) / est.std_error);
  }
  const double secs = seconds_since(t0);
  return {worst <= kKlStdErrors && secs < kKlSeconds,
          fmt("worst |mc - exact| = %.2f std errors over %zu pairs, %.2f s", worst, kKlPairs, secs)};
}

// 2. Log-sum-exp density far from a lone component.
Outcome far_stability() {
  const double var = 0.01;
  const gmm::Gmm g({gmm::Gaussian2::make(gmm::Vec2(0, 0), gmm::Mat2::Identity() * var)});
  const gmm::Vec2 x(kFarSigmas * std::sqrt(var), 0.0);
  const double stable = gmm::log_density(g, x);
  const double analytic = -std::log(2 * std::numbers::pi) - std::log(var) - 0.5 * kFarSigmas * kFarSigmas;
  const double naive = testing::naive_mixture_logpdf(g, x);
  const bool pass = std::isfinite(stable) && std::abs(stable - analytic) < kFarTolerance && std::isinf(naive);
  return {pass, fmt("stable %.9f vs analytic %.9f; literal sum gives %g", stable, analytic, naive)};
}

// 3. Linearized prior fidelity and closed-form covariances.
Outcome linearization() {
  const auto oracles = testing::table_mechanisms();
  const std::array<std::pair<mech::Builtin, std::size_t>, 4> priors = {{{mech::Builtin::SpringPrior, 0},
                                                                        {mech::Builtin::PendulumPrior, 2},
                                                                        {mech::Builtin::FallPrior, 4},
                                                                        {mech::Builtin::PulsarPrior, 6}}};
  bool pass = true;
  std::string detail;
  for (const auto& [b, oi] : priors) {
    const auto& o = oracles[oi];
    prior::AnmPriorSpec s;
    s.mechanism = mech::builtin(b);
    s.time.low = o.t_low;
    s.time.high = o.t_high;
    s.n_components = kPriorComponents;
    s.seed = 11;
    const auto g = prior::build_prior_gmm(s);
    double cov_err = 0.0;
    for (const auto& c : g.components()) {
      const double d = o.df(c.mean(0)), st2 = s.sigma_t * s.sigma_t, sn2 = s.sigma_n * s.sigma_n;
      gmm::Mat2 want;
      want << st2, d * st2, d * st2, d * d * st2 + sn2;
      for (int i = 0; i < 4; ++i) {
        cov_err = std::max(cov_err, std::abs(c.cov(i) - want(i)) / std::max(1.0, std::abs(want(i))));
      }
    }
    Rng rng(12);
    const auto pts = prior::exact_anm_sample(s, rng, kPriorSamples);
    double score = 0.0;
    for (double v : gmm::log_density(g, pts)) {
      score += v;
    }
    score /= static_cast<double>(pts.size());
    const double kde = testing::kde_self_score(pts);
    const bool ok = std::abs(score - kde) <= kPriorNats && cov_err <= kCovTolerance;
    pass = pass && ok;
    detail += fmt("%s gmm %.3f kde %.3f cov err %.1e; ", mech::builtin_name(b).data(), score, kde, cov_err);
  }
  return {pass, detail};
}

// 4. Every op and the full ELBO against central differences.
Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_op = 0.0;
  std::string worst_name;
  for (const auto& c : testing::op_cases()) {
    const auto r = testing::grad_check(c.loss, c.inputs);
    if (r.max_rel_error > worst_op) {
      worst_op = r.max_rel_error;
      worst_name = c.name;
    }
  }
  double worst_elbo = 0.0;
  for (auto kind : {vae::ModelKind::Anm, vae::ModelKind::Standard, vae::ModelKind::Temporal}) {
    worst_elbo = std::max(worst_elbo, testing::elbo_grad_check(testing::make_smooth_elbo_toy(kind)).max_rel_error);
  }
  const double secs = seconds_since(t0);
  return {worst_op < kGradTolerance && worst_elbo < kGradTolerance && secs < kGradSeconds,
          fmt("worst op %s %.2e, worst ELBO %.2e, %.1f s", worst_name.c_str(), worst_op, worst_elbo, secs)};
}

// 8. Parser round trip and dual-number derivatives.
Outcome parser() {
  double worst = 0.0;
  for (const auto& o : testing::table_mechanisms()) {
    const auto e = mech::parse(o.text);
    if (!(mech::parse(e.to_string()) == e)) {
      return {false, "round trip changed " + o.text};
    }
    for (std::size_t i = 0; i < kParserPoints; ++i) {
      const double t = o.t_low + (o.t_high - o.t_low) * (static_cast<double>(i) + 0.5) / kParserPoints;
      const auto d = e.eval_dual(t);
      worst = std::max({worst, testing::scaled_error(d.value, o.f(t)), testing::scaled_error(d.deriv, o.df(t))});
    }
  }
  return {worst <= kParserTolerance, fmt("8 expressions, worst scaled error %.2e", worst)};
}

// 9. Latent MSE of independent series.
Outcome metric_signature() {
  Rng rng(909);
  std::normal_distribution<double> nd;
  std::vector<double> a(kSeriesLength), b(kSeriesLength);
  for (std::size_t i = 0; i < kSeriesLength; ++i) {
    a[i] = nd(rng);
    b[i] = nd(rng);
  }
  const double v = eval::latent_mse(a, b);
  return {std::abs(v - 2.0) <= kSeriesTolerance, fmt("latent_mse = %.4f", v)};
}

int run_cli(std::vector<std::string> args, std::string* captured = nullptr) {
  args.insert(args.begin(), "anmvae");
  std::vector<const char*> argv;
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out, err;
  const int rc = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (captured) {
    *captured = out.str();
  }
  if (rc != 0) {
    std::cerr << err.str();
  }
  return rc;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 10. gen-data, train and eval twice.
Outcome determinism(const fs::path& root) {
  std::vector<std::string> reports;
  for (const char* name : {"run_a", "run_b"}) {
    const fs::path dir = root / "determinism" / name;
    fs::remove_all(dir);
    const std::string cfg = (kConfigs / "spring.cfg").string();
    std::string printed;
    if (run_cli({"gen-data", "-c", cfg, "-o", (dir / "data").string()}) != 0 ||
        run_cli({"train", "-c", cfg, "-d", (dir / "data").string(), "-o", (dir / "model.ckpt").string(),
                 "--metrics", (dir / "metrics.csv").string(), "--log-every", "0", "--set",
                 "model.steps=" + std::to_string(kPipelineSteps)}) != 0 ||
        run_cli({"eval", "-k", (dir / "model.ckpt").string(), "-d", (dir / "data").string(), "-o",
                 (dir / "report").string()},
                &printed) != 0) {
      return {false, "pipeline command failed"};
    }
    reports.push_back(printed + slurp(dir / "report" / "report.csv") + slurp(dir / "metrics.csv"));
  }
  const auto a = eval::read_report_csv(root / "determinism" / "run_a" / "report" / "report.csv");
  return {reports[0] == reports[1],
          fmt("two runs: latent_mse %.17g, recon_accuracy %.17g, reports %s", a.latent_mse, a.recon_accuracy,
              reports[0] == reports[1] ? "identical" : "differ")};
}

struct Trained {
  scenes::SceneSpec scene;
  scenes::VideoDataset data;
  vae::VaeCheckpoint model;
  eval::EvalReport report;
  double seconds = 0.0;
};

Trained train_preset(const std::string& preset, std::optional<vae::ModelKind> mode, const fs::path& root) {
  const ConfigText cfg = cli::load_experiment(kConfigs / (preset + ".cfg"));
  Trained t;
  t.scene = scenes::SceneSpec::from_config(cfg);
  t.data = scenes::generate_dataset(t.scene);
  vae::VaeConfig vc = vae::VaeConfig::from_config(cfg);
  if (mode) {
    vc.kind = *mode;
    if (*mode != vae::ModelKind::Anm) {
      vc.prior.reset();
    }
  }
  const std::string label = preset + "_" + std::string(vae::kind_name(vc.kind));
  const fs::path dir = root / label;
  fs::create_directories(dir);
  vae::TrainOptions opts;
  opts.metrics_path = dir / "metrics.csv";
  fs::remove(*opts.metrics_path);
  opts.on_step = [&](const vae::StepRecord& r) {
    if (r.step % 1000 == 0) {
      std::cerr << "  [" << label << "] step " << r.step << " recon " << r.losses.recon << " kl "
                << r.losses.kl << '\n';
    }
  };
  const auto t0 = std::chrono::steady_clock::now();
  t.model = vae::train(vc, t.data, opts);
  t.seconds = seconds_since(t0);
  vae::save_checkpoint(t.model, dir / "model.ckpt");
  t.report = eval::evaluate(t.model, t.data);
  eval::write_report(t.report, dir / "report");
  std::cerr << "  [" << label << "] finished at step " << t.model.step
            << (t.model.stopped_early ? " (early stop)" : "") << " in " << t.seconds << " s\n";
  return t;
}

// 5. Latent recovery of the anm model and the standard baseline.
Outcome end_to_end(const Trained& anm, const Trained& standard) {
  const double a = anm.report.latent_mse, s = standard.report.latent_mse;
  const bool pass = !anm.report.degenerate_latent && a < kAnmLatentMse && !standard.report.degenerate_latent &&
                    s >= kStandardLatentLow && s <= kStandardLatentHigh;
  return {pass, fmt("anm latent_mse %.3g (%llu steps, %.0f s); standard latent_mse %.3g (%llu steps, %.0f s)%s",
                    a, static_cast<unsigned long long>(anm.model.step), anm.seconds, s,
                    static_cast<unsigned long long>(standard.model.step), standard.seconds,
                    standard.report.degenerate_latent ? " [collapsed to a constant]" : "")};
}

// 6. Reconstruction ordering and the mean-frame failure mode.
Outcome reconstruction(const Trained& anm, const Trained& standard) {
  const ad::Tensor mean = eval::temporal_mean_frame(standard.data.frames);
  double worst = 0.0;
  for (const auto& r : eval::reconstruct(standard.model, standard.data)) {
    worst = std::max(worst, eval::mean_abs_diff(r, mean));
  }
  const bool pass = anm.report.recon_accuracy >= standard.report.recon_accuracy && worst <= kMeanFrameDistance;
  return {pass, fmt("recon accuracy anm %.3f vs standard %.3f; standard worst frame distance to mean frame %.4f",
                    anm.report.recon_accuracy, standard.report.recon_accuracy, worst)};
}

// 7. Counterfactual spring and fall videos.
Outcome counterfactuals(const Trained& spring, const Trained& fall, const fs::path& root) {
  const auto spring_mech = mech::builtin(mech::Builtin::SpringInt);
  const auto st = eval::uniform_times(spring.scene.t_low, spring.scene.t_high, 200);
  const auto siv = eval::intervene(spring.model, spring_mech, st);
  eval::write_intervention(siv, root / "spring_intervention");
  std::vector<double> centroid, target;
  for (std::size_t k = 0; k < st.size(); ++k) {
    centroid.push_back(scenes::estimate_value(spring.scene, siv.frames[k]));
    target.push_back(spring_mech.eval(st[k]));
  }
  const double corr = eval::correlation(centroid, target);

  const auto fall_mech = mech::builtin(mech::Builtin::FallInt);
  const auto ft = eval::uniform_times(fall.scene.t_low, fall.scene.t_high, 201);
  const auto fiv = eval::intervene(fall.model, fall_mech, ft);
  eval::write_intervention(fiv, root / "fall_intervention");
  // The disk is on the ground once its centroid is within one pixel row of
  // the ground row; it must reach it and stay.
  const double ground_row = scenes::value_to_row(fall.scene, fall.scene.render.value_low);
  std::vector<double> rows;
  for (const auto& frame : fiv.frames) {
    rows.push_back(scenes::value_to_row(fall.scene, scenes::estimate_value(fall.scene, frame)));
  }
  std::optional<double> landed;
  for (std::size_t k = ft.size(); k-- > 0;) {
    if (std::abs(rows[k] - ground_row) > kGroundRowTolerance) {
      break;
    }
    landed = ft[k];
  }
  const bool fall_ok = landed && std::abs(*landed - kFallGroundTime) <= kFallTimeTolerance;
  return {corr > kSpringCorrelation && fall_ok,
          fmt("spring centroid correlation %.4f; fall lands at t = %s (expected %.4f), final centroid %.2f "
              "rows from the ground row",
              corr, landed ? fmt("%.4f", *landed).c_str() : "never", kFallGroundTime,
              ground_row - rows.back())};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "anmvae_acceptance";
  fs::create_directories(root);

  int failures = 0;
  auto report = [&](int n, const std::string& title, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << "criterion " << n << ' ' << (o.pass ? "PASS" : "FAIL") << ": " << title << " | " << o.detail
              << std::endl;
  };

  report(1, "Monte-Carlo KL matches closed form", kl_kernel);
  report(2, "log-density stable far from components", far_stability);
  report(3, "linearized prior fidelity", linearization);
  report(4, "gradients match finite differences", gradients);
  report(8, "mechanism parser round trip and derivatives", parser);
  report(9, "independent series score two", metric_signature);
  report(10, "pipeline is deterministic", [&] { return determinism(root); });

  std::optional<Trained> spring_anm, spring_std, fall_anm;
  std::string train_error;
  try {
    spring_anm = train_preset("spring", vae::ModelKind::Anm, root);
    spring_std = train_preset("spring", vae::ModelKind::Standard, root);
    fall_anm = train_preset("fall", vae::ModelKind::Anm, root);
  } catch (const std::exception& e) {
    train_error = e.what();
  }
  auto need = [&](auto&& fn) -> std::function<Outcome()> {
    return [&, fn]() -> Outcome {
      if (!train_error.empty()) {
        return {false, "training failed: " + train_error};
      }
      return fn();
    };
  };
  report(5, "end-to-end latent recovery on spring", need([&] { return end_to_end(*spring_anm, *spring_std); }));
  report(6, "reconstruction ordering and mean-frame collapse",
         need([&] { return reconstruction(*spring_anm, *spring_std); }));
  report(7, "counterfactual videos", need([&] { return counterfactuals(*spring_anm, *fall_anm, root); }));

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
