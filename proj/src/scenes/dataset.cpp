#include "anmvae/scenes/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "anmvae/config_text.hpp"
#include "anmvae/errors.hpp"
#include "anmvae/scenes/ppm.hpp"

namespace anmvae::scenes {

void VideoDataset::validate() const {
  const std::size_t n = frames.size();
  if (n == 0) {
    throw ConfigError("dataset has no frames");
  }
  if (times.size() != n || ground_truth.size() != n || clamped.size() != n) {
    throw ConfigError("dataset frame, time and latent counts disagree");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (frames[i].shape() != std::vector<std::size_t>{height, width, 3}) {
      throw ConfigError("dataset frame " + std::to_string(i) + " has the wrong shape");
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw ConfigError("dataset times must be strictly increasing");
    }
  }
}

ad::Tensor VideoDataset::frame_matrix() const {
  ad::Tensor out({size(), pixel_count()});
  for (std::size_t i = 0; i < size(); ++i) {
    std::copy(frames[i].data().begin(), frames[i].data().end(), out.raw() + i * pixel_count());
  }
  return out;
}

VideoDataset generate_dataset(const SceneSpec& spec) {
  spec.validate();
  VideoDataset ds;
  ds.width = spec.width;
  ds.height = spec.height;
  for (std::size_t k = 0; k < spec.frames; ++k) {
    const double t = spec.frame_time(k);
    const double y = spec.mechanism.eval(t);
    RenderedFrame f = render_value(spec, y);
    ds.frames.push_back(std::move(f.pixels));
    ds.times.push_back(t);
    ds.ground_truth.push_back(y);
    ds.clamped.push_back(f.clamped);
  }
  return ds;
}

std::filesystem::path frame_path(const std::filesystem::path& dir, std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof name, "%06zu.ppm", index);
  return dir / "frames" / name;
}

void write_dataset(const VideoDataset& ds, const std::filesystem::path& dir) {
  ds.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir / "frames", ec);
  if (ec) {
    throw IoError("cannot create '" + (dir / "frames").string() + "': " + ec.message());
  }
  std::ofstream meta(dir / "meta.txt");
  std::ofstream clamp(dir / "clamped.txt");
  if (!meta || !clamp) {
    throw IoError("cannot write dataset metadata in '" + dir.string() + "'");
  }
  meta << ds.size() << ' ' << ds.width << ' ' << ds.height << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    meta << i << ' ' << format_real(ds.times[i]) << ' ' << format_real(ds.ground_truth[i]) << '\n';
    clamp << (ds.clamped[i] ? 1 : 0) << '\n';
    write_ppm(frame_path(dir, i), ds.frames[i]);
  }
  if (!meta || !clamp) {
    throw IoError("failed writing dataset metadata in '" + dir.string() + "'");
  }
}

VideoDataset read_dataset(const std::filesystem::path& dir) {
  std::ifstream meta(dir / "meta.txt");
  if (!meta) {
    throw IoError("cannot open '" + (dir / "meta.txt").string() + "'");
  }
  VideoDataset ds;
  std::size_t n = 0;
  if (!(meta >> n >> ds.width >> ds.height) || n == 0) {
    throw IoError("malformed dataset header in '" + (dir / "meta.txt").string() + "'");
  }
  std::ifstream clamp(dir / "clamped.txt");
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t index = 0;
    std::string t, y;
    if (!(meta >> index >> t >> y) || index != i) {
      throw IoError("malformed dataset row " + std::to_string(i) + " in meta.txt");
    }
    try {
      ds.times.push_back(parse_real(t, "time"));
      ds.ground_truth.push_back(parse_real(y, "ground truth"));
    } catch (const ConfigError& e) {
      throw IoError(std::string("meta.txt: ") + e.what());
    }
    int flag = 0;
    ds.clamped.push_back(clamp && (clamp >> flag) && flag != 0);
    ds.frames.push_back(read_ppm(frame_path(dir, i)));
    if (ds.frames.back().dim(0) != ds.height || ds.frames.back().dim(1) != ds.width) {
      throw IoError(frame_path(dir, i).string() + ": size does not match meta.txt");
    }
  }
  try {
    ds.validate();
  } catch (const ConfigError& e) {
    throw IoError(dir.string() + ": " + e.what());
  }
  return ds;
}

}  // namespace anmvae::scenes
