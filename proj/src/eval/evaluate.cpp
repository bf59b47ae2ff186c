#include "anmvae/eval/evaluate.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "anmvae/config_text.hpp"
#include "anmvae/errors.hpp"
#include "anmvae/eval/metrics.hpp"

namespace anmvae::eval {
namespace {

constexpr std::size_t kChunk = 100;

void check_dims(const vae::VaeCheckpoint& model, const scenes::VideoDataset& data) {
  data.validate();
  if (data.width != model.config.width || data.height != model.config.height) {
    throw ConfigError("dataset dimensions do not match the model");
  }
}

std::vector<ad::Tensor> split_frames(const ad::Tensor& batch, std::size_t width,
                                     std::size_t height) {
  std::vector<ad::Tensor> out;
  const std::size_t P = width * height * 3;
  for (std::size_t b = 0; b < batch.rows(); ++b) {
    out.emplace_back(std::vector<std::size_t>{height, width, 3},
                     std::vector<float>(batch.raw() + b * P, batch.raw() + (b + 1) * P));
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) {
    throw IoError("cannot write '" + p.string() + "'");
  }
  return out;
}

}  // namespace

std::vector<vae::EncoderOutput> encode_dataset(const vae::VaeCheckpoint& model,
                                               const scenes::VideoDataset& data) {
  check_dims(model, data);
  const ad::Tensor all = data.frame_matrix();
  const std::size_t P = data.pixel_count();
  std::vector<vae::EncoderOutput> out;
  for (std::size_t first = 0; first < data.size(); first += kChunk) {
    const std::size_t n = std::min(kChunk, data.size() - first);
    ad::Tensor chunk({n, P}, std::vector<float>(all.raw() + first * P, all.raw() + (first + n) * P));
    for (auto& e : vae::encode(model, chunk)) {
      out.push_back(std::move(e));
    }
  }
  return out;
}

std::vector<ad::Tensor> reconstruct(const vae::VaeCheckpoint& model,
                                    const scenes::VideoDataset& data) {
  const auto enc = encode_dataset(model, data);
  const std::size_t L = model.config.latent_dim;
  std::vector<ad::Tensor> out;
  for (std::size_t first = 0; first < data.size(); first += kChunk) {
    const std::size_t n = std::min(kChunk, data.size() - first);
    ad::Tensor z({n, L});
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t l = 0; l < L; ++l) {
        z.at(b, l) = static_cast<float>(enc[first + b].mu[l]);
      }
    }
    const std::span<const double> times(data.times.data() + first, n);
    for (auto& f : split_frames(vae::decode(model, z, times), data.width, data.height)) {
      out.push_back(std::move(f));
    }
  }
  return out;
}

EvalReport evaluate(const vae::VaeCheckpoint& model, const scenes::VideoDataset& data) {
  EvalReport r;
  r.mode = std::string(vae::kind_name(model.config.kind));
  r.times = data.times;
  r.ground_truth = data.ground_truth;
  for (const auto& e : encode_dataset(model, data)) {
    r.predicted.push_back(e.mu.at(0));
  }
  try {
    r.latent_mse = latent_mse(r.predicted, r.ground_truth);
  } catch (const NumericalDomainError&) {
    r.latent_mse = std::numeric_limits<double>::quiet_NaN();
    r.degenerate_latent = true;
  }
  r.recon_accuracy = recon_accuracy(data.frames, reconstruct(model, data));
  return r;
}

std::string format_report(const EvalReport& r) {
  std::ostringstream s;
  s << "mode=" << r.mode << '\n';
  s << "frames=" << r.predicted.size() << '\n';
  s << "latent_mse=" << format_real(r.latent_mse) << '\n';
  s << "recon_accuracy=" << format_real(r.recon_accuracy) << '\n';
  if (r.degenerate_latent) {
    s << "note: the encoder mean is constant over the video (collapsed latent)\n";
  }
  return s.str();
}

void write_report(const EvalReport& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  }
  open_out(dir / "report.txt") << format_report(r);
  auto csv = open_out(dir / "report.csv");
  csv << "metric,value\n";
  csv << "mode," << r.mode << '\n';
  csv << "frames," << r.predicted.size() << '\n';
  csv << "latent_mse," << format_real(r.latent_mse) << '\n';
  csv << "degenerate_latent," << (r.degenerate_latent ? 1 : 0) << '\n';
  csv << "recon_accuracy," << format_real(r.recon_accuracy) << '\n';
  auto lat = open_out(dir / "latents.csv");
  lat << "time,predicted,ground_truth\n";
  for (std::size_t i = 0; i < r.predicted.size(); ++i) {
    lat << format_real(r.times[i]) << ',' << format_real(r.predicted[i]) << ','
        << format_real(r.ground_truth[i]) << '\n';
  }
  if (!csv || !lat) {
    throw IoError("failed writing report in '" + dir.string() + "'");
  }
}

EvalReport read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line) || line != "metric,value") {
    throw IoError(path.string() + ": missing metric,value header");
  }
  EvalReport r;
  bool have_mse = false, have_acc = false;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw IoError(path.string() + ": malformed row '" + line + "'");
    }
    const std::string key = line.substr(0, comma), value = line.substr(comma + 1);
    try {
      if (key == "mode") {
        r.mode = value;
      } else if (key == "latent_mse") {
        r.latent_mse = value == "nan" ? std::numeric_limits<double>::quiet_NaN()
                                      : parse_real(value, key);
        have_mse = true;
      } else if (key == "recon_accuracy") {
        r.recon_accuracy = parse_real(value, key);
        have_acc = true;
      } else if (key == "degenerate_latent") {
        r.degenerate_latent = parse_bool(value, key);
      }
    } catch (const ConfigError& e) {
      throw IoError(path.string() + ": " + e.what());
    }
  }
  if (!have_mse || !have_acc) {
    throw IoError(path.string() + ": missing latent_mse or recon_accuracy");
  }
  return r;
}

std::vector<double> uniform_times(double low, double high, std::size_t n) {
  if (n < 2 || !(low < high)) {
    throw ConfigError("need at least 2 frames and low < high");
  }
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) {
    t[k] = low + (high - low) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return t;
}

Intervention intervene(const vae::VaeCheckpoint& model, const mech::MechanismExpr& mechanism,
                       std::span<const double> times) {
  if (model.config.kind != vae::ModelKind::Anm) {
    throw ConfigError("interventions need an anm-mode model");
  }
  if (times.empty()) {
    throw ConfigError("no intervention times");
  }
  Intervention iv;
  iv.times.assign(times.begin(), times.end());
  ad::Tensor z({times.size(), 1});
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double y = mechanism.eval(times[k]);
    if (!std::isfinite(y)) {
      throw NumericalDomainError("intervened mechanism is not finite", times[k]);
    }
    iv.latents.push_back(y);
    z[k] = static_cast<float>(y);
  }
  iv.frames = split_frames(vae::decode(model, z), model.config.width, model.config.height);
  return iv;
}

void write_intervention(const Intervention& iv, const std::filesystem::path& dir) {
  if (iv.frames.empty()) {
    throw ConfigError("empty intervention");
  }
  scenes::VideoDataset ds;
  ds.height = iv.frames[0].dim(0);
  ds.width = iv.frames[0].dim(1);
  ds.frames = iv.frames;
  ds.times = iv.times;
  ds.ground_truth = iv.latents;
  ds.clamped.assign(iv.frames.size(), false);
  scenes::write_dataset(ds, dir);
  auto csv = open_out(dir / "latents.csv");
  csv << "time,y\n";
  for (std::size_t k = 0; k < iv.times.size(); ++k) {
    csv << format_real(iv.times[k]) << ',' << format_real(iv.latents[k]) << '\n';
  }
  if (!csv) {
    throw IoError("failed writing latents.csv");
  }
}

}  // namespace anmvae::eval
