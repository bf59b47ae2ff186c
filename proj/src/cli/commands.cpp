#include "anmvae/cli/commands.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdlib>
#include <fstream>

#include "anmvae/errors.hpp"
#include "anmvae/eval/evaluate.hpp"
#include "anmvae/mechanism/builtins.hpp"
#include "anmvae/mechanism/parser.hpp"
#include "anmvae/prior/anm_prior.hpp"
#include "anmvae/scenes/dataset.hpp"
#include "anmvae/vae/checkpoint.hpp"
#include "anmvae/vae/trainer.hpp"

namespace anmvae::cli {
namespace fs = std::filesystem;

namespace {

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    fn();
    return kOk;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericalDomainError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  }
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) {
    fs::create_directories(p.parent_path());
  }
  std::ofstream out(p);
  if (!out) {
    throw IoError("cannot write '" + p.string() + "'");
  }
  return out;
}

mech::MechanismExpr mechanism_arg(const std::string& text) {
  try {
    return mech::builtin(text);
  } catch (const ConfigError&) {
    return mech::parse(text);
  }
}

}  // namespace

void apply_override(ConfigText& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq || dot == 0 ||
      dot + 1 == eq) {
    throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
  }
  cfg.set(assignment.substr(0, dot), assignment.substr(dot + 1, eq - dot - 1),
          assignment.substr(eq + 1));
}

void apply_seed_env(ConfigText& cfg) {
  const char* env = std::getenv("ANMVAE_SEED");
  if (env == nullptr || *env == '\0') {
    return;
  }
  const std::string seed = std::to_string(parse_uint(env, "ANMVAE_SEED"));
  cfg.set("model", "seed", seed);
  cfg.set("prior", "seed", seed);
}

void check_experiment(const ConfigText& cfg) {
  cfg.require_known_sections({"scene", "prior", "model", "paths"});
  cfg.require_known_keys("paths", {"data", "checkpoint", "metrics", "report", "out"});
  if (!cfg.has_section("scene")) {
    throw ConfigError("experiment config needs a [scene] section");
  }
  scenes::SceneSpec::from_config(cfg);
  vae::VaeConfig::from_config(cfg);
}

ConfigText load_experiment(const fs::path& path, const std::vector<std::string>& overrides) {
  ConfigText cfg = ConfigText::load(path.string());
  for (const auto& o : overrides) {
    apply_override(cfg, o);
  }
  apply_seed_env(cfg);
  check_experiment(cfg);
  return cfg;
}

int cmd_gen_data(const ConfigText& cfg, const fs::path& out_dir, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const auto spec = scenes::SceneSpec::from_config(cfg);
    const auto ds = scenes::generate_dataset(spec);
    scenes::write_dataset(ds, out_dir);
    std::size_t clamped = 0;
    for (bool c : ds.clamped) {
      clamped += c ? 1 : 0;
    }
    out << "wrote " << ds.size() << " " << ds.width << "x" << ds.height << " frames to "
        << out_dir.string() << '\n';
    if (clamped > 0) {
      out << clamped << " frames were clamped to the renderable range\n";
    }
  });
}

int cmd_train(const ConfigText& cfg_in, const TrainArgs& args, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    ConfigText cfg = cfg_in;
    if (args.mode) {
      cfg.set("model", "mode", std::string(vae::kind_name(*args.mode)));
    }
    const auto config = vae::VaeConfig::from_config(cfg);
    const auto data = scenes::read_dataset(args.data_dir);
    std::optional<vae::VaeCheckpoint> resume;
    if (args.resume) {
      resume = vae::load_checkpoint(*args.resume);
      out << "resuming from step " << resume->step << '\n';
    }
    vae::TrainOptions opts;
    opts.metrics_path = args.metrics;
    if (args.log_every > 0) {
      opts.on_step = [&](const vae::StepRecord& r) {
        if (r.step % args.log_every == 0) {
          out << "step " << r.step << " recon=" << format_real(r.losses.recon)
              << " kl=" << format_real(r.losses.kl) << " total=" << format_real(r.losses.total)
              << (r.skipped ? " (skipped)" : "") << '\n';
        }
      };
    }
    const auto ck = vae::train(config, data, opts, resume ? &*resume : nullptr);
    vae::save_checkpoint(ck, args.checkpoint);
    out << "trained " << vae::kind_name(config.kind) << " model to step " << ck.step
        << (ck.stopped_early ? " (early stop)" : "") << "; checkpoint "
        << args.checkpoint.string() << '\n';
  });
}

int cmd_eval(const fs::path& checkpoint, const fs::path& data_dir,
             const std::optional<fs::path>& report_dir, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto ck = vae::load_checkpoint(checkpoint);
    const auto data = scenes::read_dataset(data_dir);
    const auto report = eval::evaluate(ck, data);
    out << eval::format_report(report);
    if (report_dir) {
      eval::write_report(report, *report_dir);
    }
  });
}

int cmd_intervene(const fs::path& checkpoint, const std::string& mechanism, double t_low,
                  double t_high, std::size_t n_frames, const fs::path& out_dir, std::ostream& out,
                  std::ostream& err) {
  return guarded(err, [&] {
    const auto mech = mechanism_arg(mechanism);
    const auto ck = vae::load_checkpoint(checkpoint);
    const auto iv = eval::intervene(ck, mech, eval::uniform_times(t_low, t_high, n_frames));
    eval::write_intervention(iv, out_dir);
    out << "wrote " << iv.frames.size() << " intervened frames for y = " << mech.to_string()
        << " to " << out_dir.string() << '\n';
  });
}

int cmd_inspect_prior(const ConfigText& cfg, const InspectArgs& args, std::ostream& out,
                      std::ostream& err) {
  return guarded(err, [&] {
    const auto spec = vae::prior_from_config(cfg);
    const auto prior = prior::build_prior_gmm(spec);
    auto csv = open_out(args.out_csv);
    csv << "t_mean,y_mean,cov_tt,cov_ty,cov_yy\n";
    for (const auto& c : prior.components()) {
      csv << format_real(c.mean(0)) << ',' << format_real(c.mean(1)) << ','
          << format_real(c.cov(0, 0)) << ',' << format_real(c.cov(0, 1)) << ','
          << format_real(c.cov(1, 1)) << '\n';
    }
    if (!csv) {
      throw IoError("failed writing '" + args.out_csv.string() + "'");
    }
    out << "wrote " << prior.size() << " prior components to " << args.out_csv.string() << '\n';
    if (args.checkpoint || args.data_dir || args.posterior_csv) {
      if (!args.checkpoint || !args.data_dir || !args.posterior_csv) {
        throw ConfigError("posterior output needs --checkpoint, --data and --posterior-out");
      }
      const auto ck = vae::load_checkpoint(*args.checkpoint);
      const auto data = scenes::read_dataset(*args.data_dir);
      const auto enc = eval::encode_dataset(ck, data);
      auto post = open_out(*args.posterior_csv);
      post << "time,mu,sigma\n";
      for (std::size_t i = 0; i < enc.size(); ++i) {
        post << format_real(data.times[i]) << ',' << format_real(enc[i].mu[0]) << ','
             << format_real(enc[i].sigma[0]) << '\n';
      }
      if (!post) {
        throw IoError("failed writing '" + args.posterior_csv->string() + "'");
      }
      out << "wrote " << enc.size() << " posterior means to " << args.posterior_csv->string()
          << '\n';
    }
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variational autoencoders with additive-noise-model priors for video"};
  app.require_subcommand(1);
  app.fallthrough();
  std::vector<std::string> overrides;
  int threads = 0;
  app.add_option("--set", overrides, "Override a config value, section.key=value")
      ->type_name("S.K=V");
  app.add_option("--threads", threads, "Maximum worker threads")->check(CLI::NonNegativeNumber);

  std::string config_path;
  auto* gen = app.add_subcommand("gen-data", "Render a synthetic scene dataset");
  std::string gen_out;
  gen->add_option("-c,--config", config_path, "Experiment config")->required();
  gen->add_option("-o,--out", gen_out, "Output dataset directory (default: paths.data)");

  auto* train = app.add_subcommand("train", "Train a VAE on a dataset");
  std::string train_data, train_ckpt, train_mode, train_resume, train_metrics;
  std::uint64_t log_every = 1000;
  train->add_option("-c,--config", config_path, "Experiment config")->required();
  train->add_option("-d,--data", train_data, "Dataset directory (default: paths.data)");
  train->add_option("-o,--checkpoint", train_ckpt, "Checkpoint to write (default: paths.checkpoint)");
  train->add_option("-m,--mode", train_mode, "Model mode")
      ->check(CLI::IsMember({"anm", "standard", "temporal"}));
  train->add_option("--resume", train_resume, "Continue from this checkpoint");
  train->add_option("--metrics", train_metrics, "Metrics CSV (default: paths.metrics)");
  train->add_option("--log-every", log_every, "Progress line interval in steps (0: quiet)");

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  std::string ev_ckpt, ev_data, ev_out;
  ev->add_option("-k,--checkpoint", ev_ckpt, "Checkpoint")->required();
  ev->add_option("-d,--data", ev_data, "Dataset directory")->required();
  ev->add_option("-o,--out", ev_out, "Report directory");

  auto* iv = app.add_subcommand("intervene", "Decode a video from an intervened mechanism");
  std::string iv_ckpt, iv_mech, iv_out;
  double t_low = 0.0, t_high = 1.0;
  std::size_t n_frames = 200;
  iv->add_option("-k,--checkpoint", iv_ckpt, "Checkpoint of an anm model")->required();
  iv->add_option("-e,--mechanism", iv_mech, "Expression in t, or a built-in name")->required();
  iv->add_option("--t-low", t_low, "First time")->required();
  iv->add_option("--t-high", t_high, "Last time")->required();
  iv->add_option("-n,--frames", n_frames, "Number of frames");
  iv->add_option("-o,--out", iv_out, "Output directory")->required();

  auto* ins = app.add_subcommand("inspect-prior", "Dump the prior mixture as CSV");
  std::string ins_out, ins_ckpt, ins_data, ins_post;
  ins->add_option("-c,--config", config_path, "Experiment config")->required();
  ins->add_option("-o,--out", ins_out, "Prior CSV")->required();
  ins->add_option("-k,--checkpoint", ins_ckpt, "Checkpoint for posterior means");
  ins->add_option("-d,--data", ins_data, "Dataset for posterior means");
  ins->add_option("--posterior-out", ins_post, "Posterior CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (threads > 0) {
    Eigen::setNbThreads(threads);
  }

  ConfigText cfg;
  if (!config_path.empty()) {
    const int rc = guarded(err, [&] { cfg = load_experiment(config_path, overrides); });
    if (rc != kOk) {
      return rc;
    }
  } else if (!overrides.empty()) {
    err << "--set needs a command that reads a config\n";
    return kUsage;
  }
  auto path_or = [&](const std::string& given, const char* key) -> std::optional<fs::path> {
    if (!given.empty()) {
      return fs::path(given);
    }
    if (auto v = cfg.get("paths", key)) {
      return fs::path(*v);
    }
    return std::nullopt;
  };
  auto required_path = [&](const std::string& given, const char* key, const char* flag) {
    auto p = path_or(given, key);
    if (!p) {
      throw ConfigError(std::string("missing ") + flag + " (or paths." + key + ")");
    }
    return *p;
  };

  if (gen->parsed()) {
    fs::path dir;
    const int rc = guarded(err, [&] { dir = required_path(gen_out, "data", "--out"); });
    return rc != kOk ? rc : cmd_gen_data(cfg, dir, out, err);
  }
  if (train->parsed()) {
    TrainArgs a;
    const int rc = guarded(err, [&] {
      a.data_dir = required_path(train_data, "data", "--data");
      a.checkpoint = required_path(train_ckpt, "checkpoint", "--checkpoint");
      a.metrics = path_or(train_metrics, "metrics");
      if (!train_resume.empty()) {
        a.resume = fs::path(train_resume);
      }
      if (!train_mode.empty()) {
        a.mode = vae::kind_from_name(train_mode);
      }
      a.log_every = log_every;
    });
    return rc != kOk ? rc : cmd_train(cfg, a, out, err);
  }
  if (ev->parsed()) {
    std::optional<fs::path> report;
    if (!ev_out.empty()) {
      report = fs::path(ev_out);
    }
    return cmd_eval(ev_ckpt, ev_data, report, out, err);
  }
  if (iv->parsed()) {
    return cmd_intervene(iv_ckpt, iv_mech, t_low, t_high, n_frames, iv_out, out, err);
  }
  InspectArgs a;
  a.out_csv = ins_out;
  if (!ins_ckpt.empty()) a.checkpoint = fs::path(ins_ckpt);
  if (!ins_data.empty()) a.data_dir = fs::path(ins_data);
  if (!ins_post.empty()) a.posterior_csv = fs::path(ins_post);
  return cmd_inspect_prior(cfg, a, out, err);
}

}  // namespace anmvae::cli
