#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "anmvae/cli/commands.hpp"
#include "anmvae/errors.hpp"
#include "anmvae/eval/evaluate.hpp"
#include "anmvae/eval/metrics.hpp"
#include "anmvae/gmm/gmm.hpp"
#include "anmvae/mechanism/builtins.hpp"
#include "anmvae/mechanism/parser.hpp"
#include "anmvae/prior/anm_prior.hpp"
#include "anmvae/scenes/dataset.hpp"
#include "anmvae/vae/checkpoint.hpp"
#include "anmvae/vae/trainer.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace anmvae;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

/// Frames as a [T, H, W, 3] float32 array.
FloatArray stack_frames(const std::vector<ad::Tensor>& frames, std::size_t h, std::size_t w) {
  FloatArray out({frames.size(), h, w, std::size_t{3}});
  float* dst = out.mutable_data();
  for (const auto& f : frames) {
    dst = std::copy(f.raw(), f.raw() + f.size(), dst);
  }
  return out;
}

std::vector<ad::Tensor> unstack_frames(const FloatArray& a) {
  if (a.ndim() != 4 || a.shape(3) != 3) {
    throw ConfigError("frames must have shape [T, H, W, 3]");
  }
  const std::size_t t = a.shape(0), h = a.shape(1), w = a.shape(2);
  std::vector<ad::Tensor> out;
  for (std::size_t k = 0; k < t; ++k) {
    const float* src = a.data() + k * h * w * 3;
    out.emplace_back(std::vector<std::size_t>{h, w, 3}, std::vector<float>(src, src + h * w * 3));
  }
  return out;
}

std::vector<gmm::Vec2> points_from(const DoubleArray& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) {
    throw ConfigError("points must have shape [M, 2]");
  }
  std::vector<gmm::Vec2> pts;
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    pts.emplace_back(a.at(i, 0), a.at(i, 1));
  }
  return pts;
}

py::dict dataset_dict(const scenes::VideoDataset& ds) {
  py::dict d;
  d["frames"] = stack_frames(ds.frames, ds.height, ds.width);
  d["times"] = ds.times;
  d["ground_truth"] = ds.ground_truth;
  d["clamped"] = ds.clamped;
  return d;
}

scenes::VideoDataset dataset_from(const py::dict& d) {
  scenes::VideoDataset ds;
  ds.frames = unstack_frames(d["frames"].cast<FloatArray>());
  if (!ds.frames.empty()) {
    ds.height = ds.frames[0].shape()[0];
    ds.width = ds.frames[0].shape()[1];
  }
  ds.times = d["times"].cast<std::vector<double>>();
  ds.ground_truth = d.contains("ground_truth") ? d["ground_truth"].cast<std::vector<double>>()
                                               : std::vector<double>(ds.frames.size(), 0.0);
  ds.clamped = std::vector<bool>(ds.frames.size(), false);
  ds.validate();
  return ds;
}

py::dict report_dict(const eval::EvalReport& r) {
  py::dict d;
  d["mode"] = r.mode;
  d["latent_mse"] = r.latent_mse;
  d["degenerate_latent"] = r.degenerate_latent;
  d["recon_accuracy"] = r.recon_accuracy;
  d["times"] = r.times;
  d["predicted"] = r.predicted;
  d["ground_truth"] = r.ground_truth;
  return d;
}

ConfigText experiment(const fs::path& path, const std::vector<std::string>& overrides) {
  return cli::load_experiment(path, overrides);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Variational autoencoders with additive-noise-model priors over time.";

  auto config_error = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", config_error.ptr());
  py::register_exception<NumericalDomainError>(m, "NumericalDomainError", PyExc_ArithmeticError);
  auto io_error = py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<VersionError>(m, "VersionError", io_error.ptr());

  py::class_<mech::MechanismExpr>(m, "Mechanism")
      .def(py::init([](const std::string& text) { return mech::parse(text); }), py::arg("text"))
      .def_static("builtin", [](const std::string& name) { return mech::builtin(mech::builtin_from_name(name)); },
                  py::arg("name"), "Table mechanism by name, e.g. 'spring_prior' or 'fall_int'.")
      .def("__call__", &mech::MechanismExpr::eval, py::arg("t"))
      .def("derivative", [](const mech::MechanismExpr& e, double t) { return e.eval_dual(t).deriv; },
           py::arg("t"))
      .def("__str__", &mech::MechanismExpr::to_string)
      .def("__repr__", [](const mech::MechanismExpr& e) { return "Mechanism('" + e.to_string() + "')"; })
      .def("__eq__", [](const mech::MechanismExpr& a, const mech::MechanismExpr& b) { return a == b; });

  py::class_<gmm::Gmm>(m, "Gmm")
      .def(py::init([](const DoubleArray& means, const DoubleArray& covs) {
             if (means.ndim() != 2 || means.shape(1) != 2 || covs.ndim() != 3 || covs.shape(0) != means.shape(0) ||
                 covs.shape(1) != 2 || covs.shape(2) != 2) {
               throw ConfigError("expected means [N, 2] and covariances [N, 2, 2]");
             }
             std::vector<gmm::Gaussian2> comps;
             for (py::ssize_t j = 0; j < means.shape(0); ++j) {
               gmm::Mat2 c;
               c << covs.at(j, 0, 0), covs.at(j, 0, 1), covs.at(j, 1, 0), covs.at(j, 1, 1);
               comps.push_back(gmm::Gaussian2::make(gmm::Vec2(means.at(j, 0), means.at(j, 1)), c));
             }
             return gmm::Gmm(std::move(comps));
           }),
           py::arg("means"), py::arg("covariances"))
      .def("__len__", &gmm::Gmm::size)
      .def_property_readonly("means",
                             [](const gmm::Gmm& g) {
                               DoubleArray out({g.size(), std::size_t{2}});
                               for (std::size_t j = 0; j < g.size(); ++j) {
                                 out.mutable_at(j, 0) = g[j].mean(0);
                                 out.mutable_at(j, 1) = g[j].mean(1);
                               }
                               return out;
                             })
      .def_property_readonly("covariances",
                             [](const gmm::Gmm& g) {
                               DoubleArray out({g.size(), std::size_t{2}, std::size_t{2}});
                               for (std::size_t j = 0; j < g.size(); ++j) {
                                 for (int r = 0; r < 2; ++r) {
                                   for (int c = 0; c < 2; ++c) {
                                     out.mutable_at(j, r, c) = g[j].cov(r, c);
                                   }
                                 }
                               }
                               return out;
                             })
      .def("log_density",
           [](const gmm::Gmm& g, const DoubleArray& points) {
             const auto v = gmm::log_density(g, points_from(points));
             return DoubleArray(static_cast<py::ssize_t>(v.size()), v.data());
           },
           py::arg("points"), "Log-density at each row of an [M, 2] array.")
      .def("sample",
           [](const gmm::Gmm& g, std::size_t count, std::uint64_t seed) {
             Rng rng(seed);
             const auto s = gmm::sample(g, rng, count);
             DoubleArray out({count, std::size_t{2}});
             for (std::size_t i = 0; i < count; ++i) {
               out.mutable_at(i, 0) = s[i].point(0);
               out.mutable_at(i, 1) = s[i].point(1);
             }
             return out;
           },
           py::arg("count"), py::arg("seed") = 0);

  m.def(
      "build_prior",
      [](const mech::MechanismExpr& mechanism, double t_low, double t_high, double sigma_t, double sigma_n,
         std::size_t n_components, std::uint64_t seed) {
        prior::AnmPriorSpec s;
        s.mechanism = mechanism;
        s.time.low = t_low;
        s.time.high = t_high;
        s.sigma_t = sigma_t;
        s.sigma_n = sigma_n;
        s.n_components = n_components;
        s.seed = seed;
        return prior::build_prior_gmm(s);
      },
      py::arg("mechanism"), py::arg("t_low"), py::arg("t_high"), py::arg("sigma_t") = 0.01,
      py::arg("sigma_n") = 0.05, py::arg("n_components") = 1000, py::arg("seed") = 0,
      "Linearized Gaussian-mixture approximation of y = f(t) + n with t uniform.");

  m.def(
      "kl_mc",
      [](const gmm::Gmm& q, const gmm::Gmm& p, std::size_t samples_per_component, std::uint64_t seed) {
        Rng rng(seed);
        const auto e = gmm::kl_mc(q, p, samples_per_component, rng);
        return py::make_tuple(e.value, e.std_error);
      },
      py::arg("q"), py::arg("p"), py::arg("samples_per_component") = 1000, py::arg("seed") = 0,
      "Monte-Carlo KL(q || p); returns (estimate, standard error).");

  m.def("latent_mse", [](std::vector<double> pred, std::vector<double> gt) { return eval::latent_mse(pred, gt); },
        py::arg("predicted"), py::arg("ground_truth"));
  m.def(
      "recon_accuracy",
      [](const FloatArray& x, const FloatArray& xhat) {
        return eval::recon_accuracy(unstack_frames(x), unstack_frames(xhat));
      },
      py::arg("original"), py::arg("reconstruction"));

  m.def(
      "generate_dataset",
      [](const fs::path& config, const std::vector<std::string>& overrides) {
        return dataset_dict(scenes::generate_dataset(scenes::SceneSpec::from_config(experiment(config, overrides))));
      },
      py::arg("config"), py::arg("overrides") = std::vector<std::string>{},
      "Renders the [scene] of an experiment config. Returns frames [T, H, W, 3], times, ground_truth, clamped.");
  m.def("read_dataset", [](const fs::path& dir) { return dataset_dict(scenes::read_dataset(dir)); },
        py::arg("directory"));
  m.def("write_dataset", [](const py::dict& d, const fs::path& dir) { scenes::write_dataset(dataset_from(d), dir); },
        py::arg("dataset"), py::arg("directory"));

  py::class_<vae::VaeCheckpoint>(m, "Model")
      .def_property_readonly("mode", [](const vae::VaeCheckpoint& c) { return std::string(vae::kind_name(c.config.kind)); })
      .def_property_readonly("step", [](const vae::VaeCheckpoint& c) { return c.step; })
      .def_property_readonly("stopped_early", [](const vae::VaeCheckpoint& c) { return c.stopped_early; })
      .def_property_readonly("losses",
                             [](const vae::VaeCheckpoint& c) {
                               py::dict d;
                               d["recon"] = c.losses.recon;
                               d["kl"] = c.losses.kl;
                               d["total"] = c.losses.total;
                               return d;
                             })
      .def_property_readonly("image_shape", [](const vae::VaeCheckpoint& c) {
        return py::make_tuple(c.config.height, c.config.width, 3);
      })
      .def("save", [](const vae::VaeCheckpoint& c, const fs::path& p) { vae::save_checkpoint(c, p); }, py::arg("path"))
      .def_static("load", &vae::load_checkpoint, py::arg("path"))
      .def(
          "encode",
          [](const vae::VaeCheckpoint& c, const FloatArray& frames) {
            const auto fs_ = unstack_frames(frames);
            ad::Tensor batch({fs_.size(), c.config.pixel_count()});
            for (std::size_t k = 0; k < fs_.size(); ++k) {
              if (fs_[k].size() != c.config.pixel_count()) {
                throw ConfigError("frame size does not match the model");
              }
              std::copy(fs_[k].raw(), fs_[k].raw() + fs_[k].size(), batch.raw() + k * c.config.pixel_count());
            }
            const auto out = vae::encode(c, batch);
            const std::size_t l = c.config.latent_dim;
            DoubleArray mu({out.size(), l}), sigma({out.size(), l});
            for (std::size_t k = 0; k < out.size(); ++k) {
              for (std::size_t j = 0; j < l; ++j) {
                mu.mutable_at(k, j) = out[k].mu[j];
                sigma.mutable_at(k, j) = out[k].sigma[j];
              }
            }
            return py::make_tuple(mu, sigma);
          },
          py::arg("frames"), "Posterior mean and standard deviation, each [T, latent_dim].")
      .def(
          "decode",
          [](const vae::VaeCheckpoint& c, const DoubleArray& latents, std::vector<double> times) {
            if (latents.ndim() != 2) {
              throw ConfigError("latents must have shape [B, latent_dim]");
            }
            ad::Tensor z({static_cast<std::size_t>(latents.shape(0)), static_cast<std::size_t>(latents.shape(1))});
            for (std::size_t i = 0; i < z.size(); ++i) {
              z[i] = static_cast<float>(latents.data()[i]);
            }
            const ad::Tensor x = vae::decode(c, z, times);
            std::vector<ad::Tensor> frames;
            const std::size_t p = c.config.pixel_count();
            for (std::size_t b = 0; b < z.rows(); ++b) {
              frames.emplace_back(std::vector<std::size_t>{c.config.height, c.config.width, 3},
                                  std::vector<float>(x.raw() + b * p, x.raw() + (b + 1) * p));
            }
            return stack_frames(frames, c.config.height, c.config.width);
          },
          py::arg("latents"), py::arg("times") = std::vector<double>{});

  m.def(
      "train",
      [](const fs::path& config, std::optional<py::dict> dataset, const std::vector<std::string>& overrides,
         std::optional<std::string> mode, std::optional<fs::path> metrics) {
        std::vector<std::string> all = overrides;
        if (mode) {
          all.push_back("model.mode=" + std::string(vae::kind_name(vae::kind_from_name(*mode))));
        }
        const ConfigText cfg = experiment(config, all);
        const vae::VaeConfig vc = vae::VaeConfig::from_config(cfg);
        const scenes::VideoDataset ds = dataset ? dataset_from(*dataset)
                                                : scenes::generate_dataset(scenes::SceneSpec::from_config(cfg));
        vae::TrainOptions opts;
        opts.metrics_path = metrics;
        py::gil_scoped_release release;
        return vae::train(vc, ds, opts);
      },
      py::arg("config"), py::arg("dataset") = py::none(), py::arg("overrides") = std::vector<std::string>{},
      py::arg("mode") = py::none(), py::arg("metrics") = py::none(),
      "Trains the [model] of an experiment config on `dataset` (or on the rendered [scene]).");

  m.def("evaluate", [](const vae::VaeCheckpoint& c, const py::dict& d) { return report_dict(eval::evaluate(c, dataset_from(d))); },
        py::arg("model"), py::arg("dataset"));

  m.def(
      "intervene",
      [](const vae::VaeCheckpoint& c, const mech::MechanismExpr& mechanism, std::vector<double> times) {
        const auto iv = eval::intervene(c, mechanism, times);
        py::dict d;
        d["times"] = iv.times;
        d["latents"] = iv.latents;
        d["frames"] = stack_frames(iv.frames, c.config.height, c.config.width);
        return d;
      },
      py::arg("model"), py::arg("mechanism"), py::arg("times"),
      "Decodes the noiseless intervened mechanism at each time (anm models only).");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> full{"anmvae"};
        full.insert(full.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : full) {
          argv.push_back(a.c_str());
        }
        std::ostringstream out, err;
        int rc;
        {
          py::gil_scoped_release release;
          rc = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(rc, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line with `args`; returns (exit code, stdout, stderr).");
}
