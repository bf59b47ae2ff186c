#pragma once

#include <array>
#include <cstddef>
#include <string_view>

#include "anmvae/autodiff/tensor.hpp"
#include "anmvae/config_text.hpp"
#include "anmvae/mechanism/expr.hpp"

namespace anmvae::scenes {

enum class SceneKind { Spring, Pendulum, Fall, Pulsar };

std::string_view kind_name(SceneKind k);
SceneKind kind_from_name(std::string_view name);

using Rgb = std::array<float, 3>;

/// Free rendering choices. Lengths are fractions of the frame height unless
/// noted, so a preset renders the same picture at any resolution.
struct RenderParams {
  double ball_radius = 0.06;
  Rgb background = {0.18f, 0.2f, 0.24f};
  Rgb foreground = {0.85f, 0.55f, 0.3f};
  Rgb string_color = {0.35f, 0.37f, 0.42f};
  /// Column of the travel axis (spring, fall) or of the pivot, as a
  /// fraction of the width.
  double anchor_x = 0.5;
  /// Pivot row (pendulum).
  double anchor_y = 0.1;
  /// Pendulum string length.
  double length = 0.7;
  /// Mechanism values mapped onto the travel band (spring, fall).
  double value_low = -1.0;
  double value_high = 1.0;
  /// Top/bottom margin of the travel band.
  double margin = 0.1;
  /// Pulsar blob standard deviation.
  double blob_sigma = 0.15;
  /// Pulsar intensity giving full brightness.
  double intensity_max = 1.0;
  int supersample = 4;
};

struct SceneSpec {
  SceneKind kind = SceneKind::Spring;
  std::size_t width = 64;
  std::size_t height = 64;
  std::size_t frames = 200;
  mech::MechanismExpr mechanism;
  double t_low = 0.0;
  double t_high = 1.0;
  RenderParams render;

  /// Mechanism, time range and render defaults of a scene kind at the given
  /// size. `width`/`height` of 0 select the full-size defaults.
  static SceneSpec preset(SceneKind kind, std::size_t width = 0, std::size_t height = 0,
                          std::size_t frames = 200);

  void validate() const;
  std::size_t pixel_count() const { return width * height * 3; }
  /// Time of frame k on the uniform grid.
  double frame_time(std::size_t k) const;

  /// Reads/writes the [scene] section. Missing keys keep preset values.
  static SceneSpec from_config(const ConfigText& cfg);
  void to_config(ConfigText& cfg) const;
};

/// Full-size frame dimensions (width, height) of each scene kind.
std::array<std::size_t, 2> default_dimensions(SceneKind kind);

struct RenderedFrame {
  ad::Tensor pixels;  // [height, width, 3], values in [0, 1]
  bool clamped = false;
};

/// Anti-aliased frame at time t. Spring/fall place the disk on a vertical
/// band (value_high at the top margin, value_low at the bottom margin);
/// pendulum swings a disk on a string about a pivot by angle f(t); pulsar
/// draws a centered Gaussian blob of brightness clamp(f(t)/intensity_max).
RenderedFrame render_frame(const SceneSpec& spec, double t);
/// Same, for an explicit mechanism value instead of f(t).
RenderedFrame render_value(const SceneSpec& spec, double value);

/// Pixel row (continuous, 0 at the top edge) of the disk center for a value.
double value_to_row(const SceneSpec& spec, double value);
double row_to_value(const SceneSpec& spec, double row);

/// Inverse renderer: recovers the mechanism value from a frame. Uses the
/// intensity-weighted centroid of pixels whose foreground weight is at
/// least `threshold` of the maximum (spring, fall, pendulum) or the mean
/// frame brightness (pulsar, raw intensity).
double estimate_value(const SceneSpec& spec, const ad::Tensor& frame, double threshold = 0.0);

}  // namespace anmvae::scenes
