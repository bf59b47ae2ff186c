#include "anmvae/vae/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "anmvae/errors.hpp"

namespace anmvae::vae {
namespace {

constexpr char kMagic[4] = {'A', 'N', 'M', 'V'};

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
  }
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  const char* take(std::size_t n) {
    if (bytes_.size() - pos_ < n) {
      throw IoError("checkpoint is truncated");
    }
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  template <typename T>
  T le() {
    const auto* p = reinterpret_cast<const unsigned char*>(take(sizeof(T)));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    }
    return static_cast<T>(v);
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

void put_floats(std::string& out, const ad::Tensor& t) {
  for (float f : t.data()) {
    put_le(out, std::bit_cast<std::uint32_t>(f));
  }
}

void get_floats(Reader& in, ad::Tensor& t) {
  for (float& f : t.data()) {
    f = std::bit_cast<float>(in.le<std::uint32_t>());
  }
}

}  // namespace

std::string encode_checkpoint(const VaeCheckpoint& ck) {
  ConfigText cfg;
  ck.config.to_config(cfg);
  cfg.set("state", "step", std::to_string(ck.step));
  cfg.set("state", "recon", format_real(ck.losses.recon));
  cfg.set("state", "kl", format_real(ck.losses.kl));
  cfg.set("state", "total", format_real(ck.losses.total));
  cfg.set("state", "stopped_early", ck.stopped_early ? "true" : "false");
  const std::string text = cfg.to_string();

  std::string out(kMagic, 4);
  put_le(out, kCheckpointVersion);
  put_le(out, static_cast<std::uint64_t>(text.size()));
  out += text;
  for (const ad::Tensor* t : ck.encoder.tensors()) {
    put_floats(out, *t);
  }
  for (const ad::Tensor* t : ck.decoder.tensors()) {
    put_floats(out, *t);
  }
  return out;
}

VaeCheckpoint decode_checkpoint(const std::string& bytes) {
  Reader in(bytes);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw VersionError("not an anmvae checkpoint (bad magic)");
  }
  in.take(4);
  const auto version = in.le<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw VersionError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto len = in.le<std::uint64_t>();
  if (len > bytes.size()) {
    throw IoError("checkpoint is truncated");
  }
  const std::string text(in.take(static_cast<std::size_t>(len)), static_cast<std::size_t>(len));

  VaeCheckpoint ck;
  try {
    const ConfigText cfg = ConfigText::parse(text);
    cfg.require_known_sections({"model", "prior", "state"});
    cfg.require_known_keys("state", {"step", "recon", "kl", "total", "stopped_early"});
    ck.config = VaeConfig::from_config(cfg);
    auto state = [&](const char* key) {
      auto v = cfg.get("state", key);
      if (!v) {
        throw ConfigError(std::string("missing state.") + key);
      }
      return *v;
    };
    ck.step = parse_uint(state("step"), "state.step");
    ck.losses.recon = parse_real(state("recon"), "state.recon");
    ck.losses.kl = parse_real(state("kl"), "state.kl");
    ck.losses.total = parse_real(state("total"), "state.total");
    ck.stopped_early = parse_bool(state("stopped_early"), "state.stopped_early");
  } catch (const ConfigError& e) {
    throw IoError(std::string("corrupt checkpoint header: ") + e.what());
  }
  const auto& c = ck.config;
  ck.encoder = ad::MlpParams::zeros(
      ad::standard_widths(c.pixel_count(), c.encoder_output_width(), c.hidden));
  ck.decoder = ad::MlpParams::zeros(
      ad::standard_widths(c.decoder_input_width(), c.pixel_count(), c.hidden));
  for (ad::Tensor* t : ck.encoder.tensors()) {
    get_floats(in, *t);
  }
  for (ad::Tensor* t : ck.decoder.tensors()) {
    get_floats(in, *t);
  }
  if (!in.done()) {
    throw IoError("checkpoint has trailing bytes");
  }
  return ck;
}

void save_checkpoint(const VaeCheckpoint& ck, const std::filesystem::path& path) {
  const std::string bytes = encode_checkpoint(ck);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot write '" + tmp.string() + "'");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      throw IoError("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("cannot move checkpoint into '" + path.string() + "': " + ec.message());
  }
}

VaeCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open checkpoint '" + path.string() + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace anmvae::vae
