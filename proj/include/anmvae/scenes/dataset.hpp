#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "anmvae/autodiff/tensor.hpp"
#include "anmvae/scenes/scene.hpp"

namespace anmvae::scenes {

/// Ordered video frames with timestamps and noiseless ground-truth latents.
struct VideoDataset {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<ad::Tensor> frames;  // each [height, width, 3]
  std::vector<double> times;
  std::vector<double> ground_truth;
  std::vector<bool> clamped;

  std::size_t size() const { return frames.size(); }
  std::size_t pixel_count() const { return width * height * 3; }
  /// Throws ConfigError if lengths disagree or times are not increasing.
  void validate() const;
  /// Frames flattened into a [T, pixels] matrix.
  ad::Tensor frame_matrix() const;
};

VideoDataset generate_dataset(const SceneSpec& spec);

/// Layout: `meta.txt` (line 1 `T W H`, then `index time ground_truth` per
/// frame) and `frames/%06d.ppm`. Frames are quantized to 8 bits.
void write_dataset(const VideoDataset& ds, const std::filesystem::path& dir);
VideoDataset read_dataset(const std::filesystem::path& dir);

std::filesystem::path frame_path(const std::filesystem::path& dir, std::size_t index);

}  // namespace anmvae::scenes
