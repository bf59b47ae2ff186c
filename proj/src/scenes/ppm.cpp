#include "anmvae/scenes/ppm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "anmvae/errors.hpp"

namespace anmvae::scenes {
namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::size_t header_number(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') {
        ++pos;
      }
    } else {
      break;
    }
  }
  std::size_t value = 0, digits = 0;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
    ++pos;
    if (++digits > 9) {
      throw IoError("ppm header number too large");
    }
  }
  if (digits == 0) {
    throw IoError("malformed ppm header");
  }
  return value;
}

}  // namespace

std::string encode_ppm(const ad::Tensor& image) {
  if (image.rank() != 3 || image.dim(2) != 3) {
    throw ConfigError("ppm images must be [height, width, 3]");
  }
  std::string out = "P6\n" + std::to_string(image.dim(1)) + " " + std::to_string(image.dim(0)) +
                    "\n255\n";
  out.reserve(out.size() + image.size());
  for (float v : image.data()) {
    const float c = std::clamp(v, 0.0f, 1.0f);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0f))));
  }
  return out;
}

ad::Tensor decode_ppm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw IoError("not a binary ppm (P6) image");
  }
  std::size_t pos = 2;
  const std::size_t w = header_number(bytes, pos);
  const std::size_t h = header_number(bytes, pos);
  const std::size_t maxval = header_number(bytes, pos);
  if (maxval != 255) {
    throw IoError("only 8-bit ppm images are supported");
  }
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw IoError("malformed ppm header");
  }
  ++pos;
  const std::size_t n = w * h * 3;
  if (w == 0 || h == 0 || bytes.size() - pos < n) {
    throw IoError("truncated ppm pixel data");
  }
  ad::Tensor img({h, w, 3});
  for (std::size_t i = 0; i < n; ++i) {
    img[i] = static_cast<float>(static_cast<unsigned char>(bytes[pos + i])) / 255.0f;
  }
  return img;
}

void write_ppm(const std::filesystem::path& path, const ad::Tensor& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write '" + path.string() + "'");
  }
  const std::string bytes = encode_ppm(image);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

ad::Tensor read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return decode_ppm(ss.str());
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace anmvae::scenes
