#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "anmvae/vae/model.hpp"

namespace anmvae::vae {

/// Layout: "ANMV", u32 version, u64 config length, config text (with a
/// [state] section), then little-endian f32 weights and biases of the
/// encoder layers followed by the decoder layers.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const VaeCheckpoint& ck);
VaeCheckpoint decode_checkpoint(const std::string& bytes);

/// Written to a temporary file and renamed into place.
void save_checkpoint(const VaeCheckpoint& ck, const std::filesystem::path& path);
VaeCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace anmvae::vae
