#pragma once

// Mixture-of-rain image formation: rain-streak pattern rendering, adherent
// raindrop fields, depth-dependent transmissions and the streak / drop /
// haze / combined compositors.
//
// Coordinates: pixel (x, y) has its center at (x, y); the canvas spans
// [-0.5, w - 0.5] x [-0.5, h - 0.5]. Streak angles are in degrees measured
// from the image's downward vertical, positive toward +x.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "morkit/error.hpp"
#include "morkit/raster.hpp"
#include "morkit/rng.hpp"

namespace morkit {

using Rgb = std::array<double, 3>;

struct Range {
  double min = 0.0;
  double max = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

struct StreakParams {
  double alpha = 0.02;         // attenuation per depth unit
  double density = 200.0;      // streaks per megapixel
  double angle_mean = 8.0;     // degrees
  double angle_jitter = 4.0;   // degrees, std-dev of the normal perturbation
  Range length{30.0, 60.0};    // pixels
  Range width{1.0, 2.0};       // pixels
  Range intensity{0.35, 0.75};

  void validate() const {
    detail::require(std::isfinite(alpha) && alpha >= 0.0, "streak.alpha must be >= 0");
    detail::require(std::isfinite(density) && density >= 0.0, "streak.density must be >= 0");
    detail::require(std::isfinite(angle_mean), "streak.angle_mean must be finite");
    detail::require(std::isfinite(angle_jitter) && angle_jitter >= 0.0, "streak.angle_jitter must be >= 0");
    for (const auto& [name, r] : {std::pair{"streak.length", length}, std::pair{"streak.width", width},
                                  std::pair{"streak.intensity", intensity}}) {
      detail::require(std::isfinite(r.min) && std::isfinite(r.max) && r.min >= 0.0 && r.min <= r.max,
                      std::string(name) + " must satisfy 0 <= min <= max");
    }
    detail::require(intensity.max <= 1.0, "streak.intensity must lie in [0,1]");
  }
  friend bool operator==(const StreakParams&, const StreakParams&) = default;
};

struct DropParams {
  double count_density = 60.0;     // drops per megapixel
  double radius_log_mean = 2.4;    // log pixels
  double radius_log_sigma = 0.35;
  double thickness_max = 0.85;
  double mask_threshold = 0.05;    // tau

  void validate() const {
    detail::require(std::isfinite(count_density) && count_density >= 0.0, "drops.count_density must be >= 0");
    detail::require(std::isfinite(radius_log_mean), "drops.radius_log_mean must be finite");
    detail::require(std::isfinite(radius_log_sigma) && radius_log_sigma >= 0.0,
                    "drops.radius_log_sigma must be finite and >= 0");
    detail::require(thickness_max > 0.0 && thickness_max <= 1.0, "drops.thickness_max must lie in (0,1]");
    detail::require(mask_threshold > 0.0 && mask_threshold < 1.0, "drops.mask_threshold must lie in (0,1)");
    detail::require(mask_threshold < thickness_max, "drops.mask_threshold must be below drops.thickness_max");
  }
  friend bool operator==(const DropParams&, const DropParams&) = default;
};

struct HazeParams {
  double beta = 0.01;                 // scattering per depth unit
  Rgb atmosphere{0.85, 0.85, 0.85};   // A, global atmosphere light
  Rgb ambient{0.80, 0.80, 0.82};      // A-hat, ambient light / color cast

  void validate() const {
    detail::require(std::isfinite(beta) && beta >= 0.0, "haze.beta must be >= 0");
    for (double v : atmosphere) detail::require(v >= 0.0 && v <= 1.0, "haze.atmosphere must lie in [0,1]^3");
    for (double v : ambient) detail::require(v >= 0.0 && v <= 1.0, "haze.ambient must lie in [0,1]^3");
  }
  friend bool operator==(const HazeParams&, const HazeParams&) = default;
};

/// Per-sample uniform perturbation half-widths applied by batch synthesis.
struct JitterParams {
  double alpha = 0.0;
  double beta = 0.0;
  double streak_density = 0.0;
  double drop_density = 0.0;
  double angle_mean = 0.0;

  bool any() const {
    return alpha != 0.0 || beta != 0.0 || streak_density != 0.0 || drop_density != 0.0 || angle_mean != 0.0;
  }
  void validate() const {
    for (double v : {alpha, beta, streak_density, drop_density, angle_mean}) {
      detail::require(std::isfinite(v) && v >= 0.0, "jitter half-widths must be finite and >= 0");
    }
  }
  friend bool operator==(const JitterParams&, const JitterParams&) = default;
};

struct RainRecipe {
  StreakParams streak;
  DropParams drops;
  HazeParams haze;
  JitterParams jitter;
  std::uint64_t seed = 0;

  void validate() const {
    streak.validate();
    drops.validate();
    haze.validate();
    jitter.validate();
  }
  friend bool operator==(const RainRecipe&, const RainRecipe&) = default;
};

/// Binary raindrop mask M and raindrop layer D.
class DropField {
 public:
  DropField() = default;

  DropField(std::size_t width, std::size_t height, std::vector<std::uint8_t> mask, std::vector<double> layer)
      : size_{width, height}, mask_(std::move(mask)), layer_(std::move(layer)) {
    if (width == 0 || height == 0) throw DimensionError("DropField: zero dimension");
    if (mask_.size() != width * height || layer_.size() != width * height) {
      throw DimensionError("DropField: data length does not equal H*W");
    }
    for (auto m : mask_) detail::require(m <= 1, "DropField: mask values must be 0 or 1");
    for (double d : layer_) detail::require(d >= 0.0 && d <= 1.0, "DropField: layer values must lie in [0,1]");
  }

  static DropField empty(std::size_t width, std::size_t height) {
    return DropField(width, height, std::vector<std::uint8_t>(width * height, 0), std::vector<double>(width * height, 0.0));
  }

  std::size_t width() const { return size_.width; }
  std::size_t height() const { return size_.height; }
  Size size() const { return size_; }
  std::span<const std::uint8_t> mask() const { return mask_; }
  std::span<const double> layer() const { return layer_; }

  friend bool operator==(const DropField&, const DropField&) = default;

 private:
  Size size_;
  std::vector<std::uint8_t> mask_;
  std::vector<double> layer_;
};

struct Drop {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.0;
};

namespace detail {

inline constexpr std::uint64_t kStreakDomain = 0x53545245414B53ull;  // "STREAKS"
inline constexpr std::uint64_t kDropDomain = 0x44524F5053ull;        // "DROPS"

inline std::size_t count_for_density(double per_megapixel, std::size_t w, std::size_t h) {
  return static_cast<std::size_t>(std::ceil(per_megapixel * static_cast<double>(w) * static_cast<double>(h) / 1e6));
}

inline double point_segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double u = 0.0;
  if (len2 > 0.0) u = std::clamp(((px - ax) * vx + (py - ay) * vy) / len2, 0.0, 1.0);
  const double dx = px - (ax + u * vx), dy = py - (ay + u * vy);
  return std::hypot(dx, dy);
}

inline double channel_value(const Rgb& rgb, std::size_t channels, std::size_t c) {
  if (channels == 3) return rgb[c];
  return 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
}

inline TransmissionMap exp_transmission(const DepthMap& d, double coefficient, const char* what) {
  if (!(coefficient >= 0.0) || !std::isfinite(coefficient)) {
    throw Error(std::string(what) + ": coefficient must be finite and >= 0");
  }
  std::vector<double> t(d.data().size());
  const auto depth = d.data();
  for (std::size_t i = 0; i < t.size(); ++i) {
    // Floor at the smallest normal double so t stays in (0, 1] for huge depths.
    t[i] = std::max(std::exp(-coefficient * depth[i]), std::numeric_limits<double>::min());
  }
  return TransmissionMap(d.width(), d.height(), std::move(t));
}

}  // namespace detail

/// One anti-aliased streak segment; exposed so tests can reason about geometry.
struct Streak {
  double cx = 0.0, cy = 0.0;
  double angle_deg = 0.0;
  double length = 0.0, width = 0.0, intensity = 0.0;
};

/// Draws ceil(density * w * h / 1e6) streak geometries. Streak i is drawn from
/// its own child stream, so the list is a pure function of (w, h, p, seed).
inline std::vector<Streak> sample_streaks(std::size_t w, std::size_t h, const StreakParams& p, std::uint64_t seed) {
  if (w == 0 || h == 0) throw DimensionError("render_streak_pattern: zero-area canvas");
  p.validate();
  const std::size_t n = detail::count_for_density(p.density, w, h);
  const CounterRng root = CounterRng(seed).split(detail::kStreakDomain);
  std::vector<Streak> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng = root.split(i);
    Streak& s = out[i];
    s.cx = -0.5 + rng.uniform01() * static_cast<double>(w);
    s.cy = -0.5 + rng.uniform01() * static_cast<double>(h);
    s.angle_deg = p.angle_mean + p.angle_jitter * rng.normal();
    s.length = rng.uniform(p.length.min, p.length.max);
    s.width = rng.uniform(p.width.min, p.width.max);
    s.intensity = rng.uniform(p.intensity.min, p.intensity.max);
  }
  return out;
}

/// Rasterizes streaks additively. Pixel coverage of a streak of width W at
/// distance r from its center segment is clamp(W/2 + 0.5 - r, 0, 1); the
/// accumulated sum is clamped to 1.
inline Image rasterize_streaks(std::size_t w, std::size_t h, std::span<const Streak> streaks) {
  if (w == 0 || h == 0) throw DimensionError("rasterize_streaks: zero-area canvas");
  std::vector<double> acc(w * h, 0.0);
  const auto wi = static_cast<long long>(w), hi = static_cast<long long>(h);
  for (const Streak& s : streaks) {
    const double a = s.angle_deg * std::numbers::pi / 180.0;
    const double dx = std::sin(a) * 0.5 * s.length, dy = std::cos(a) * 0.5 * s.length;
    const double x0 = s.cx - dx, y0 = s.cy - dy, x1 = s.cx + dx, y1 = s.cy + dy;
    const double reach = 0.5 * s.width + 0.5;
    const long long bx0 = std::max(0LL, static_cast<long long>(std::floor(std::min(x0, x1) - reach)));
    const long long bx1 = std::min(wi - 1, static_cast<long long>(std::ceil(std::max(x0, x1) + reach)));
    const long long by0 = std::max(0LL, static_cast<long long>(std::floor(std::min(y0, y1) - reach)));
    const long long by1 = std::min(hi - 1, static_cast<long long>(std::ceil(std::max(y0, y1) + reach)));
    for (long long y = by0; y <= by1; ++y) {
      for (long long x = bx0; x <= bx1; ++x) {
        const double r = detail::point_segment_distance(static_cast<double>(x), static_cast<double>(y), x0, y0, x1, y1);
        const double coverage = std::clamp(reach - r, 0.0, 1.0);
        if (coverage > 0.0) acc[static_cast<std::size_t>(y * wi + x)] += s.intensity * coverage;
      }
    }
  }
  for (double& v : acc) v = std::min(v, 1.0);
  return Image(w, h, 1, std::move(acc));
}

/// Rain-streak intensity pattern S_pattern in [0,1].
inline Image render_streak_pattern(std::size_t w, std::size_t h, const StreakParams& p, std::uint64_t seed) {
  const auto streaks = sample_streaks(w, h, p, seed);
  return rasterize_streaks(w, h, streaks);
}

/// t_r(x) = exp(-alpha d(x)).
inline TransmissionMap streak_transmission(const DepthMap& d, double alpha) {
  return detail::exp_transmission(d, alpha, "streak_transmission");
}

/// t(x) = exp(-beta d(x)).
inline TransmissionMap haze_transmission(const DepthMap& d, double beta) {
  return detail::exp_transmission(d, beta, "haze_transmission");
}

inline std::vector<Drop> sample_drops(std::size_t w, std::size_t h, const DropParams& p, std::uint64_t seed) {
  if (w == 0 || h == 0) throw DimensionError("render_raindrops: zero-area canvas");
  p.validate();
  const std::size_t n = detail::count_for_density(p.count_density, w, h);
  const CounterRng root = CounterRng(seed).split(detail::kDropDomain);
  std::vector<Drop> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng = root.split(i);
    out[i].cx = -0.5 + rng.uniform01() * static_cast<double>(w);
    out[i].cy = -0.5 + rng.uniform01() * static_cast<double>(h);
    out[i].radius = std::exp(p.radius_log_mean + p.radius_log_sigma * rng.normal());
  }
  return out;
}

/// Thickness of a single drop at distance r from its center:
/// thickness_max * cos^2(pi r / (2R)) for r <= R, else 0.
inline double drop_profile(double r, double radius, double thickness_max) {
  if (!(radius > 0.0) || r > radius) return 0.0;
  const double c = std::cos(std::numbers::pi * r / (2.0 * radius));
  return thickness_max * c * c;
}

/// D is the per-pixel maximum over drops; M(x) = [D(x) > tau].
inline DropField rasterize_drops(std::size_t w, std::size_t h, std::span<const Drop> drops, const DropParams& p) {
  if (w == 0 || h == 0) throw DimensionError("rasterize_drops: zero-area canvas");
  p.validate();
  std::vector<double> layer(w * h, 0.0);
  const auto wi = static_cast<long long>(w), hi = static_cast<long long>(h);
  for (const Drop& d : drops) {
    const long long x0 = std::max(0LL, static_cast<long long>(std::floor(d.cx - d.radius)));
    const long long x1 = std::min(wi - 1, static_cast<long long>(std::ceil(d.cx + d.radius)));
    const long long y0 = std::max(0LL, static_cast<long long>(std::floor(d.cy - d.radius)));
    const long long y1 = std::min(hi - 1, static_cast<long long>(std::ceil(d.cy + d.radius)));
    for (long long y = y0; y <= y1; ++y) {
      for (long long x = x0; x <= x1; ++x) {
        const double r = std::hypot(static_cast<double>(x) - d.cx, static_cast<double>(y) - d.cy);
        double& v = layer[static_cast<std::size_t>(y * wi + x)];
        v = std::max(v, drop_profile(r, d.radius, p.thickness_max));
      }
    }
  }
  std::vector<std::uint8_t> mask(w * h);
  for (std::size_t i = 0; i < layer.size(); ++i) {
    layer[i] = std::clamp(layer[i], 0.0, 1.0);
    mask[i] = layer[i] > p.mask_threshold ? 1 : 0;
  }
  return DropField(w, h, std::move(mask), std::move(layer));
}

inline DropField render_raindrops(std::size_t w, std::size_t h, const DropParams& p, std::uint64_t seed) {
  const auto drops = sample_drops(w, h, p, seed);
  return rasterize_drops(w, h, drops, p);
}

// Compositors without the final clamp, operating on interleaved sample
// arrays with `channels` channels. Intermediate sums may exceed 1.
namespace unclamped {

inline std::vector<double> rain_streaks(std::span<const double> background, std::size_t channels,
                                        std::span<const double> s_pattern, std::span<const double> t_r) {
  std::vector<double> out(background.size());
  for (std::size_t i = 0; i < s_pattern.size(); ++i) {
    const double s = s_pattern[i] * t_r[i];
    for (std::size_t c = 0; c < channels; ++c) out[i * channels + c] = background[i * channels + c] + s;
  }
  return out;
}

inline std::vector<double> raindrops(std::span<const double> background, std::size_t channels,
                                     std::span<const std::uint8_t> mask, std::span<const double> layer) {
  std::vector<double> out(background.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double keep = 1.0 - static_cast<double>(mask[i]);
    for (std::size_t c = 0; c < channels; ++c) out[i * channels + c] = keep * background[i * channels + c] + layer[i];
  }
  return out;
}

inline std::vector<double> haze(std::span<const double> background, std::size_t channels, std::span<const double> t,
                                const Rgb& light) {
  std::vector<double> out(background.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double a = detail::channel_value(light, channels, c);
      out[i * channels + c] = background[i * channels + c] * t[i] + a * (1.0 - t[i]);
    }
  }
  return out;
}

inline std::vector<double> mor(std::span<const double> background, std::size_t channels,
                               std::span<const double> s_pattern, std::span<const double> t_r,
                               std::span<const std::uint8_t> mask, std::span<const double> layer,
                               std::span<const double> t, const Rgb& ambient) {
  std::vector<double> out(background.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double keep = 1.0 - static_cast<double>(mask[i]);
    const double s = s_pattern[i] * t_r[i];
    for (std::size_t c = 0; c < channels; ++c) {
      const double a = detail::channel_value(ambient, channels, c);
      const double inner = keep * (background[i * channels + c] + s) + a * layer[i];
      out[i * channels + c] = inner * t[i] + a * (1.0 - t[i]);
    }
  }
  return out;
}

}  // namespace unclamped

namespace detail {

inline Image clamp_to_image(std::size_t w, std::size_t h, std::size_t channels, std::vector<double> v) {
  for (double& x : v) x = std::clamp(x, 0.0, 1.0);
  return Image(w, h, channels, std::move(v));
}

inline void require_single_channel(const Image& img, const char* what) {
  if (img.channels() != 1) throw DimensionError(std::string(what) + ": s_pattern must be single-channel");
}

}  // namespace detail

/// R_s = clamp01(B + S_pattern * t_r), the streak value added to every channel.
inline Image compose_rain_streaks(const Image& background, const Image& s_pattern, const TransmissionMap& t_r) {
  detail::require_single_channel(s_pattern, "compose_rain_streaks");
  require_same_size(background.size(), s_pattern.size(), "compose_rain_streaks");
  require_same_size(background.size(), t_r.size(), "compose_rain_streaks");
  return detail::clamp_to_image(background.width(), background.height(), background.channels(),
                                unclamped::rain_streaks(background.data(), background.channels(), s_pattern.data(),
                                                        t_r.data()));
}

/// R_d = clamp01((1 - M) B + D), D added to every channel.
inline Image compose_raindrops(const Image& background, const DropField& drops) {
  require_same_size(background.size(), drops.size(), "compose_raindrops");
  return detail::clamp_to_image(background.width(), background.height(), background.channels(),
                                unclamped::raindrops(background.data(), background.channels(), drops.mask(),
                                                     drops.layer()));
}

/// R_h = B t + A (1 - t). Stays inside [0,1] for valid inputs; only rounding
/// overshoot is clamped.
inline Image compose_haze(const Image& background, const TransmissionMap& t, const Rgb& atmosphere) {
  require_same_size(background.size(), t.size(), "compose_haze");
  for (double v : atmosphere) detail::require(v >= 0.0 && v <= 1.0, "compose_haze: atmosphere light outside [0,1]");
  auto out = unclamped::haze(background.data(), background.channels(), t.data(), atmosphere);
  for (double v : out) {
    if (v < -1e-12 || v > 1.0 + 1e-12) throw Error("compose_haze: result left [0,1]; inputs invalid");
  }
  return detail::clamp_to_image(background.width(), background.height(), background.channels(), std::move(out));
}

/// R_mor = clamp01(((1 - M)(B + S_pattern t_r) + A_hat D) t + (1 - t) A_hat).
inline Image compose_mor(const Image& background, const Image& s_pattern, const TransmissionMap& t_r,
                         const DropField& drops, const TransmissionMap& t, const Rgb& ambient) {
  detail::require_single_channel(s_pattern, "compose_mor");
  require_same_size(background.size(), s_pattern.size(), "compose_mor");
  require_same_size(background.size(), t_r.size(), "compose_mor");
  require_same_size(background.size(), drops.size(), "compose_mor");
  require_same_size(background.size(), t.size(), "compose_mor");
  for (double v : ambient) detail::require(v >= 0.0 && v <= 1.0, "compose_mor: ambient light outside [0,1]");
  return detail::clamp_to_image(
      background.width(), background.height(), background.channels(),
      unclamped::mor(background.data(), background.channels(), s_pattern.data(), t_r.data(), drops.mask(),
                     drops.layer(), t.data(), ambient));
}

}  // namespace morkit
