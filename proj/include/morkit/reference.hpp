#pragma once

// Deliberately naive reference implementations used as oracles by the
// self-test and the test suites. They share no code path with the optimized
// kernels: SSIM uses a direct 2-D window with two-pass moments, the dark
// channel a per-pixel window scan, TV explicit gradient images.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "morkit/raster.hpp"
#include "morkit/rng.hpp"

namespace morkit::reference {

/// Single-channel SSIM over all valid windows with a 2-D Gaussian window.
inline double ssim(const Image& x, const Image& y, double c1, double c2, std::size_t window = 11,
                   double sigma = 1.5) {
  const long r = static_cast<long>(window / 2);
  std::vector<double> wts(window * window);
  double total = 0.0;
  for (long j = -r; j <= r; ++j) {
    for (long i = -r; i <= r; ++i) {
      const double v = std::exp(-static_cast<double>(i * i + j * j) / (2.0 * sigma * sigma));
      wts[static_cast<std::size_t>((j + r) * static_cast<long>(window) + (i + r))] = v;
      total += v;
    }
  }
  for (double& v : wts) v /= total;
  const std::size_t ow = x.width() - window + 1, oh = x.height() - window + 1;
  double acc = 0.0;
  for (std::size_t oy = 0; oy < oh; ++oy) {
    for (std::size_t ox = 0; ox < ow; ++ox) {
      double mx = 0.0, my = 0.0;
      for (std::size_t j = 0; j < window; ++j) {
        for (std::size_t i = 0; i < window; ++i) {
          const double wt = wts[j * window + i];
          mx += wt * x.at(ox + i, oy + j);
          my += wt * y.at(ox + i, oy + j);
        }
      }
      double vx = 0.0, vy = 0.0, cxy = 0.0;
      for (std::size_t j = 0; j < window; ++j) {
        for (std::size_t i = 0; i < window; ++i) {
          const double wt = wts[j * window + i];
          const double dx = x.at(ox + i, oy + j) - mx, dy = y.at(ox + i, oy + j) - my;
          vx += wt * dx * dx;
          vy += wt * dy * dy;
          cxy += wt * dx * dy;
        }
      }
      acc += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
  }
  return acc / static_cast<double>(ow * oh);
}

/// 2x2 mean pooling written as an explicit block average.
inline Image mean_pool2(const Image& img) {
  const std::size_t w = img.width() / 2, h = img.height() / 2;
  std::vector<double> out(w * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double s = 0.0;
      for (std::size_t j = 0; j < 2; ++j) {
        for (std::size_t i = 0; i < 2; ++i) s += img.at(2 * x + i, 2 * y + j);
      }
      out[y * w + x] = s / 4.0;
    }
  }
  return Image(w, h, 1, std::move(out));
}

/// Window minimum over all channels with clamped (edge-replicated) indices.
inline std::vector<double> dark_channel(const Image& img, std::size_t patch) {
  const long r = static_cast<long>(patch / 2);
  const long w = static_cast<long>(img.width()), h = static_cast<long>(img.height());
  std::vector<double> out(img.size().area());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      double m = std::numeric_limits<double>::infinity();
      for (long dy = -r; dy <= r; ++dy) {
        for (long dx = -r; dx <= r; ++dx) {
          const long sx = std::clamp(x + dx, 0L, w - 1), sy = std::clamp(y + dy, 0L, h - 1);
          for (std::size_t c = 0; c < img.channels(); ++c) {
            m = std::min(m, img.at(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy), c));
          }
        }
      }
      out[static_cast<std::size_t>(y * w + x)] = m;
    }
  }
  return out;
}

inline double dark_channel_mean(const Image& img, std::size_t patch) {
  const auto dc = reference::dark_channel(img, patch);
  double s = 0.0;
  for (double v : dc) s += v;
  return s / static_cast<double>(dc.size());
}

/// Mean of |grad_h + grad_v| (or |grad_h| + |grad_v| when `anisotropic`).
inline double tv(const Image& img, bool anisotropic = false) {
  const std::size_t w = img.width(), h = img.height(), ch = img.channels();
  std::vector<double> gh(img.sample_count(), 0.0), gv(img.sample_count(), 0.0);
  for (std::size_t c = 0; c < ch; ++c) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x + 1 < w; ++x) gh[(y * w + x) * ch + c] = img.at(x + 1, y, c) - img.at(x, y, c);
    }
    for (std::size_t y = 0; y + 1 < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) gv[(y * w + x) * ch + c] = img.at(x, y + 1, c) - img.at(x, y, c);
    }
  }
  double s = 0.0;
  for (std::size_t i = 0; i < gh.size(); ++i) s += anisotropic ? std::abs(gh[i]) + std::abs(gv[i]) : std::abs(gh[i] + gv[i]);
  return s / static_cast<double>(gh.size());
}

// Seeded fixtures -----------------------------------------------------------

inline Image random_image(std::size_t w, std::size_t h, std::size_t channels, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<double> v(w * h * channels);
  for (double& x : v) x = rng.uniform01();
  return Image(w, h, channels, std::move(v));
}

/// Smooth random field plus mild noise; SSIM behaves more like it does on
/// natural images than on white noise.
inline Image textured_image(std::size_t w, std::size_t h, std::size_t channels, std::uint64_t seed) {
  CounterRng rng(seed);
  const double fx = rng.uniform(0.01, 0.05), fy = rng.uniform(0.01, 0.05), ph = rng.uniform(0.0, 6.28);
  std::vector<double> v(w * h * channels);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < channels; ++c) {
        const double base = 0.5 + 0.3 * std::sin(fx * static_cast<double>(x) + ph + static_cast<double>(c)) *
                                      std::cos(fy * static_cast<double>(y));
        v[(y * w + x) * channels + c] = std::clamp(base + 0.1 * (rng.uniform01() - 0.5), 0.0, 1.0);
      }
    }
  }
  return Image(w, h, channels, std::move(v));
}

inline Tensor4 random_normal_tensor(std::size_t n, std::size_t c, std::size_t h, std::size_t w, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<double> v(n * c * h * w);
  for (double& x : v) x = rng.normal();
  return Tensor4(n, c, h, w, std::move(v));
}

}  // namespace morkit::reference
