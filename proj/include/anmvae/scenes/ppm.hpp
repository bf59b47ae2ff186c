#pragma once

#include <filesystem>
#include <string>

#include "anmvae/autodiff/tensor.hpp"

namespace anmvae::scenes {

/// Binary P6, maxval 255. `image` is [height, width, 3] in [0, 1]; each
/// channel is stored as round(value * 255).
std::string encode_ppm(const ad::Tensor& image);
ad::Tensor decode_ppm(const std::string& bytes);

void write_ppm(const std::filesystem::path& path, const ad::Tensor& image);
ad::Tensor read_ppm(const std::filesystem::path& path);

}  // namespace anmvae::scenes
