#include "anmvae/scenes/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "anmvae/errors.hpp"
#include "anmvae/mechanism/builtins.hpp"
#include "anmvae/mechanism/parser.hpp"

namespace anmvae::scenes {
namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

/// Coverage of a sub-sample at signed distance `inside` (positive inside)
/// with an edge ramp one sub-sample wide.
double edge_coverage(double inside, double ramp) { return clamp01(inside / ramp + 0.5); }

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double u = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  const double dx = px - (ax + u * vx), dy = py - (ay + u * vy);
  return std::sqrt(dx * dx + dy * dy);
}

struct Layout {
  double cx = 0.0, cy = 0.0;          // disk center (pixels)
  bool string = false;
  double sx = 0.0, sy = 0.0;          // pivot
  double brightness = 0.0;            // pulsar
  bool clamped = false;
};

Layout layout_for(const SceneSpec& spec, double value) {
  const RenderParams& r = spec.render;
  const double w = static_cast<double>(spec.width);
  const double h = static_cast<double>(spec.height);
  Layout l;
  switch (spec.kind) {
    case SceneKind::Spring:
    case SceneKind::Fall: {
      const double v = std::clamp(value, r.value_low, r.value_high);
      l.clamped = v != value;
      l.cx = r.anchor_x * w;
      l.cy = value_to_row(spec, v);
      break;
    }
    case SceneKind::Pendulum: {
      const double len = r.length * h;
      l.string = true;
      l.sx = r.anchor_x * w;
      l.sy = r.anchor_y * h;
      l.cx = l.sx + len * std::sin(value);
      l.cy = l.sy + len * std::cos(value);
      const double rad = r.ball_radius * h;
      if (l.cx - rad < 0.0 || l.cx + rad > w || l.cy - rad < 0.0 || l.cy + rad > h) {
        l.clamped = true;
        l.cx = std::clamp(l.cx, rad, w - rad);
        l.cy = std::clamp(l.cy, rad, h - rad);
      }
      break;
    }
    case SceneKind::Pulsar: {
      const double b = value / r.intensity_max;
      l.brightness = clamp01(b);
      l.clamped = l.brightness != b;
      l.cx = 0.5 * w;
      l.cy = 0.5 * h;
      break;
    }
  }
  return l;
}

}  // namespace

std::string_view kind_name(SceneKind k) {
  switch (k) {
    case SceneKind::Spring:
      return "spring";
    case SceneKind::Pendulum:
      return "pendulum";
    case SceneKind::Fall:
      return "fall";
    case SceneKind::Pulsar:
      return "pulsar";
  }
  return "?";
}

SceneKind kind_from_name(std::string_view name) {
  for (SceneKind k : {SceneKind::Spring, SceneKind::Pendulum, SceneKind::Fall, SceneKind::Pulsar}) {
    if (kind_name(k) == name) {
      return k;
    }
  }
  throw ConfigError("unknown scene kind '" + std::string(name) + "'");
}

std::array<std::size_t, 2> default_dimensions(SceneKind kind) {
  switch (kind) {
    case SceneKind::Spring:
      return {226, 100};
    case SceneKind::Pendulum:
      return {108, 100};
    case SceneKind::Fall:
      return {205, 100};
    case SceneKind::Pulsar:
      return {78, 77};
  }
  return {64, 64};
}

SceneSpec SceneSpec::preset(SceneKind kind, std::size_t width, std::size_t height,
                            std::size_t frames) {
  SceneSpec s;
  s.kind = kind;
  const auto dims = default_dimensions(kind);
  s.width = width == 0 ? dims[0] : width;
  s.height = height == 0 ? dims[1] : height;
  s.frames = frames;
  switch (kind) {
    case SceneKind::Spring:
      s.mechanism = mech::builtin(mech::Builtin::SpringPrior);
      s.t_low = 0.0;
      s.t_high = 2.0 * std::numbers::pi;
      break;
    case SceneKind::Pendulum:
      s.mechanism = mech::builtin(mech::Builtin::PendulumPrior);
      s.t_low = 0.0;
      s.t_high = 2.0 * std::numbers::pi;
      s.render.length = 0.45;
      break;
    case SceneKind::Fall:
      s.mechanism = mech::builtin(mech::Builtin::FallPrior);
      s.t_low = 0.0;
      s.t_high = 1.0;
      s.render.value_low = 0.0;
      s.render.value_high = 1.0;
      break;
    case SceneKind::Pulsar: {
      s.mechanism = mech::builtin(mech::Builtin::PulsarPrior);
      s.t_low = 0.0;
      s.t_high = 1.0;
      double peak = 0.0;
      for (int k = 0; k <= 10000; ++k) {
        peak = std::max(peak, s.mechanism.eval(k / 10000.0));
      }
      s.render.intensity_max = peak;
      break;
    }
  }
  return s;
}

void SceneSpec::validate() const {
  if (frames < 2) {
    throw ConfigError("a scene needs at least 2 frames");
  }
  if (width < 16 || height < 16) {
    throw ConfigError("scene frames must be at least 16x16 pixels");
  }
  if (mechanism.empty()) {
    throw ConfigError("scene has no mechanism");
  }
  if (!(t_low < t_high)) {
    throw ConfigError("scene time range needs t_low < t_high");
  }
  if (!(render.value_low < render.value_high)) {
    throw ConfigError("scene value range needs value_low < value_high");
  }
  if (render.supersample < 1) {
    throw ConfigError("supersample must be at least 1");
  }
  if (!(render.intensity_max > 0.0)) {
    throw ConfigError("intensity_max must be positive");
  }
}

double SceneSpec::frame_time(std::size_t k) const {
  return t_low + (t_high - t_low) * static_cast<double>(k) / static_cast<double>(frames - 1);
}

double value_to_row(const SceneSpec& spec, double value) {
  const RenderParams& r = spec.render;
  const double h = static_cast<double>(spec.height);
  const double top = r.margin * h;
  const double bottom = (1.0 - r.margin) * h;
  return top + (r.value_high - value) / (r.value_high - r.value_low) * (bottom - top);
}

double row_to_value(const SceneSpec& spec, double row) {
  const RenderParams& r = spec.render;
  const double h = static_cast<double>(spec.height);
  const double top = r.margin * h;
  const double bottom = (1.0 - r.margin) * h;
  return r.value_high - (row - top) / (bottom - top) * (r.value_high - r.value_low);
}

RenderedFrame render_value(const SceneSpec& spec, double value) {
  const RenderParams& r = spec.render;
  const Layout l = layout_for(spec, value);
  const std::size_t w = spec.width, h = spec.height;
  const int ss = r.supersample;
  const double sub = 1.0 / ss;
  const double radius = r.ball_radius * static_cast<double>(h);
  const double blob_sigma = r.blob_sigma * static_cast<double>(h);

  RenderedFrame out{ad::Tensor({h, w, 3}), l.clamped};
  for (std::size_t row = 0; row < h; ++row) {
    for (std::size_t col = 0; col < w; ++col) {
      double disk = 0.0, line = 0.0;
      for (int i = 0; i < ss; ++i) {
        for (int j = 0; j < ss; ++j) {
          const double py = static_cast<double>(row) + (i + 0.5) * sub;
          const double px = static_cast<double>(col) + (j + 0.5) * sub;
          if (spec.kind == SceneKind::Pulsar) {
            const double d2 = (px - l.cx) * (px - l.cx) + (py - l.cy) * (py - l.cy);
            disk += l.brightness * std::exp(-0.5 * d2 / (blob_sigma * blob_sigma));
            continue;
          }
          const double d = std::hypot(px - l.cx, py - l.cy);
          disk += edge_coverage(radius - d, sub);
          if (l.string) {
            const double ds = segment_distance(px, py, l.sx, l.sy, l.cx, l.cy);
            line += edge_coverage(0.5 - ds, sub);
          }
        }
      }
      disk /= ss * ss;
      line /= ss * ss;
      for (int c = 0; c < 3; ++c) {
        double v = r.background[c];
        v += (r.string_color[c] - v) * line;
        v += (r.foreground[c] - v) * disk;
        out.pixels[(row * w + col) * 3 + c] = static_cast<float>(clamp01(v));
      }
    }
  }
  return out;
}

RenderedFrame render_frame(const SceneSpec& spec, double t) {
  return render_value(spec, spec.mechanism.eval(t));
}

double estimate_value(const SceneSpec& spec, const ad::Tensor& frame, double threshold) {
  const std::size_t w = spec.width, h = spec.height;
  if (frame.size() != w * h * 3) {
    throw ConfigError("frame size does not match the scene");
  }
  const RenderParams& r = spec.render;
  if (spec.kind == SceneKind::Pulsar) {
    double acc = 0.0;
    for (float v : frame.data()) {
      acc += v;
    }
    return acc / static_cast<double>(frame.size());
  }
  double dir[3], norm2 = 0.0;
  for (int c = 0; c < 3; ++c) {
    dir[c] = r.foreground[c] - r.background[c];
    norm2 += dir[c] * dir[c];
  }
  std::vector<double> weight(w * h);
  double max_w = 0.0;
  for (std::size_t p = 0; p < w * h; ++p) {
    double dot = 0.0;
    for (int c = 0; c < 3; ++c) {
      dot += (frame[p * 3 + c] - r.background[c]) * dir[c];
    }
    weight[p] = std::max(0.0, dot / norm2);
    max_w = std::max(max_w, weight[p]);
  }
  if (spec.kind == SceneKind::Pendulum) {
    threshold = std::max(threshold, 0.5);
  }
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t row = 0; row < h; ++row) {
    for (std::size_t col = 0; col < w; ++col) {
      double wt = weight[row * w + col];
      if (wt < threshold * max_w) {
        continue;
      }
      sw += wt;
      sx += wt * (static_cast<double>(col) + 0.5);
      sy += wt * (static_cast<double>(row) + 0.5);
    }
  }
  if (!(sw > 0.0)) {
    throw NumericalDomainError("frame has no foreground to locate", sw);
  }
  const double cx = sx / sw, cy = sy / sw;
  if (spec.kind == SceneKind::Pendulum) {
    return std::atan2(cx - r.anchor_x * static_cast<double>(w),
                      cy - r.anchor_y * static_cast<double>(h));
  }
  return row_to_value(spec, cy);
}

SceneSpec SceneSpec::from_config(const ConfigText& cfg) {
  cfg.require_known_keys("scene", {"kind", "width", "height", "frames", "mechanism", "t_low",
                                   "t_high", "ball_radius", "background", "foreground",
                                   "string_color", "anchor_x", "anchor_y", "length",
                                   "value_low", "value_high", "margin", "blob_sigma",
                                   "intensity_max", "supersample"});
  const auto kind = cfg.get("scene", "kind");
  if (!kind) {
    throw ConfigError("[scene] needs a 'kind'");
  }
  SceneSpec s = preset(kind_from_name(*kind));
  auto real = [&](const char* key, double& dst) {
    if (auto v = cfg.get("scene", key)) {
      dst = parse_real(*v, std::string("scene.") + key);
    }
  };
  auto size = [&](const char* key, std::size_t& dst) {
    if (auto v = cfg.get("scene", key)) {
      dst = parse_uint(*v, std::string("scene.") + key);
    }
  };
  auto color = [&](const char* key, Rgb& dst) {
    if (auto v = cfg.get("scene", key)) {
      std::string text = *v;
      std::replace(text.begin(), text.end(), ',', ' ');
      std::size_t pos = 0;
      for (int c = 0; c < 3; ++c) {
        const auto start = text.find_first_not_of(' ', pos);
        if (start == std::string::npos) {
          throw ConfigError(std::string("scene.") + key + ": expected three components");
        }
        pos = std::min(text.find(' ', start), text.size());
        dst[c] = static_cast<float>(parse_real(text.substr(start, pos - start), key));
      }
    }
  };
  size("width", s.width);
  size("height", s.height);
  size("frames", s.frames);
  if (auto v = cfg.get("scene", "mechanism")) {
    try {
      s.mechanism = mech::parse(*v);
    } catch (const ParseError& e) {
      throw ConfigError(std::string("scene.mechanism: ") + e.what());
    }
  }
  real("t_low", s.t_low);
  real("t_high", s.t_high);
  real("ball_radius", s.render.ball_radius);
  color("background", s.render.background);
  color("foreground", s.render.foreground);
  color("string_color", s.render.string_color);
  real("anchor_x", s.render.anchor_x);
  real("anchor_y", s.render.anchor_y);
  real("length", s.render.length);
  real("value_low", s.render.value_low);
  real("value_high", s.render.value_high);
  real("margin", s.render.margin);
  real("blob_sigma", s.render.blob_sigma);
  real("intensity_max", s.render.intensity_max);
  if (auto v = cfg.get("scene", "supersample")) {
    s.render.supersample = static_cast<int>(parse_uint(*v, "scene.supersample"));
  }
  s.validate();
  return s;
}

void SceneSpec::to_config(ConfigText& cfg) const {
  auto color = [](const Rgb& c) {
    return format_real(c[0]) + ", " + format_real(c[1]) + ", " + format_real(c[2]);
  };
  cfg.set("scene", "kind", std::string(kind_name(kind)));
  cfg.set("scene", "width", std::to_string(width));
  cfg.set("scene", "height", std::to_string(height));
  cfg.set("scene", "frames", std::to_string(frames));
  cfg.set("scene", "mechanism", mechanism.to_string());
  cfg.set("scene", "t_low", format_real(t_low));
  cfg.set("scene", "t_high", format_real(t_high));
  cfg.set("scene", "ball_radius", format_real(render.ball_radius));
  cfg.set("scene", "background", color(render.background));
  cfg.set("scene", "foreground", color(render.foreground));
  cfg.set("scene", "string_color", color(render.string_color));
  cfg.set("scene", "anchor_x", format_real(render.anchor_x));
  cfg.set("scene", "anchor_y", format_real(render.anchor_y));
  cfg.set("scene", "length", format_real(render.length));
  cfg.set("scene", "value_low", format_real(render.value_low));
  cfg.set("scene", "value_high", format_real(render.value_high));
  cfg.set("scene", "margin", format_real(render.margin));
  cfg.set("scene", "blob_sigma", format_real(render.blob_sigma));
  cfg.set("scene", "intensity_max", format_real(render.intensity_max));
  cfg.set("scene", "supersample", std::to_string(render.supersample));
}

}  // namespace anmvae::scenes
