#pragma once

// Full-reference image metrics and the training-loss arithmetic of the
// deraining objective: MSE/PSNR, SSIM, multi-scale SSIM, L1, depth L1, dark
// channel loss, total variation loss, LSGAN scores, reconstruction loss and
// the weighted total.
//
// All kernels accumulate in double. Norm-style losses are normalized by
// element count so their values do not depend on resolution.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "morkit/error.hpp"
#include "morkit/raster.hpp"

namespace morkit {

struct SsimParams {
  double c1 = 0.0001;
  double c2 = 0.0009;
  std::size_t window = 11;
  double window_sigma = 1.5;
  std::size_t scales = 5;
  std::vector<double> beta = std::vector<double>(5, 1.0);   // luminance exponent per scale
  std::vector<double> gamma = std::vector<double>(5, 1.0);  // contrast-structure exponent per scale

  /// Same parameters with `m` scales and unit exponents.
  static SsimParams with_scales(std::size_t m) {
    SsimParams p;
    p.scales = m;
    p.beta.assign(m, 1.0);
    p.gamma.assign(m, 1.0);
    return p;
  }

  void validate() const {
    detail::require(c1 > 0.0 && std::isfinite(c1), "ssim: C1 must be > 0");
    detail::require(c2 > 0.0 && std::isfinite(c2), "ssim: C2 must be > 0");
    detail::require(window >= 3 && window % 2 == 1, "ssim: window must be odd and >= 3");
    detail::require(window_sigma > 0.0 && std::isfinite(window_sigma), "ssim: window_sigma must be > 0");
    detail::require(scales >= 1, "ssim: scale count must be >= 1");
    detail::require(beta.size() == scales && gamma.size() == scales, "ssim: exponent arrays must have one entry per scale");
    for (double e : beta) detail::require(std::isfinite(e), "ssim: non-finite exponent");
    for (double e : gamma) detail::require(std::isfinite(e), "ssim: non-finite exponent");
  }
};

struct LossWeights {
  double lambda1 = 0.1;   // adversarial
  double lambda2 = 0.01;  // dark channel
  double lambda3 = 0.01;  // total variation
  double alpha_rec = 0.1; // MS-SSIM share of the reconstruction loss

  void validate() const {
    for (double v : {lambda1, lambda2, lambda3, alpha_rec}) {
      detail::require(std::isfinite(v) && v >= 0.0, "loss weights must be finite and >= 0");
    }
  }
};

/// Discriminator outputs for one batch.
class ScoreBatch {
 public:
  ScoreBatch(std::vector<double> scores) : scores_(std::move(scores)) {  // NOLINT(implicit)
    if (scores_.empty()) throw Error("ScoreBatch: empty batch");
    for (double s : scores_) detail::require(std::isfinite(s), "ScoreBatch: non-finite score");
  }
  ScoreBatch(std::initializer_list<double> scores) : ScoreBatch(std::vector<double>(scores)) {}

  std::span<const double> scores() const { return scores_; }
  std::size_t size() const { return scores_.size(); }

 private:
  std::vector<double> scores_;
};

/// Single-channel dark channel raster.
using DarkChannelMap = Image;

enum class TvVariant {
  SumThenAbs,   // |grad_h + grad_v|, the objective as written
  Anisotropic,  // |grad_h| + |grad_v|
};

inline constexpr double kPsnrCapDb = 99.0;
inline constexpr std::size_t kDefaultDarkChannelPatch = 15;

namespace detail {

inline void require_same_shape(const Image& x, const Image& y, const char* what) {
  require_same_size(x.size(), y.size(), what);
  if (x.channels() != y.channels()) throw DimensionError(std::string(what) + ": channel count mismatch");
}

inline std::vector<double> gaussian_window_1d(std::size_t size, double sigma) {
  std::vector<double> g(size);
  const double r = static_cast<double>(size / 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - r;
    g[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  return g;
}

// Valid-mode separable filtering of a w x h plane with a 1-D kernel.
inline std::vector<double> filter_valid(std::span<const double> src, std::size_t w, std::size_t h,
                                        std::span<const double> k) {
  const std::size_t n = k.size(), ow = w - n + 1, oh = h - n + 1;
  std::vector<double> tmp(ow * h);
  for (std::size_t y = 0; y < h; ++y) {
    const double* row = src.data() + y * w;
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += k[i] * row[x + i];
      tmp[y * ow + x] = s;
    }
  }
  std::vector<double> out(ow * oh);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += k[i] * tmp[(y + i) * ow + x];
      out[y * ow + x] = s;
    }
  }
  return out;
}

// Per-window luminance and contrast-structure terms.
struct SsimMaps {
  std::vector<double> luminance;
  std::vector<double> contrast_structure;
};

inline SsimMaps ssim_maps(const Image& x, const Image& y, const SsimParams& p) {
  const std::size_t w = x.width(), h = x.height();
  const auto k = gaussian_window_1d(p.window, p.window_sigma);
  const auto xs = x.data(), ys = y.data();
  std::vector<double> xx(xs.size()), yy(xs.size()), xy(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xx[i] = xs[i] * xs[i];
    yy[i] = ys[i] * ys[i];
    xy[i] = xs[i] * ys[i];
  }
  const auto mu_x = filter_valid(xs, w, h, k);
  const auto mu_y = filter_valid(ys, w, h, k);
  const auto e_xx = filter_valid(xx, w, h, k);
  const auto e_yy = filter_valid(yy, w, h, k);
  const auto e_xy = filter_valid(xy, w, h, k);
  SsimMaps maps;
  maps.luminance.resize(mu_x.size());
  maps.contrast_structure.resize(mu_x.size());
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i], my = mu_y[i];
    const double vx = e_xx[i] - mx * mx, vy = e_yy[i] - my * my, cov = e_xy[i] - mx * my;
    maps.luminance[i] = (2.0 * mx * my + p.c1) / (mx * mx + my * my + p.c1);
    maps.contrast_structure[i] = (2.0 * cov + p.c2) / (vx + vy + p.c2);
  }
  return maps;
}

inline double power_term(double base, double exponent) {
  if (exponent == 1.0) return base;
  // Fractional powers of a negative correlation term are undefined; floor at 0.
  if (exponent != std::floor(exponent)) base = std::max(base, 0.0);
  return std::pow(base, exponent);
}

inline double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace detail

inline double mse(const Image& x, const Image& y) {
  detail::require_same_shape(x, y, "mse");
  const auto a = x.data(), b = y.data();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

/// Peak 1.0; identical inputs (and anything above the cap) report kPsnrCapDb.
inline double psnr(const Image& x, const Image& y) {
  const double e = mse(x, y);
  if (e == 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(1.0 / e));
}

/// Mean SSIM over all valid Gaussian windows. RGB inputs are compared on
/// BT.601 luma.
inline double ssim(const Image& x, const Image& y, const SsimParams& p = {}) {
  detail::require_same_shape(x, y, "ssim");
  p.validate();
  if (std::min(x.width(), x.height()) < p.window) throw DimensionError("ssim: image smaller than window");
  const auto maps = detail::ssim_maps(to_luma(x), to_luma(y), p);
  double s = 0.0;
  for (std::size_t i = 0; i < maps.luminance.size(); ++i) s += maps.luminance[i] * maps.contrast_structure[i];
  return s / static_cast<double>(maps.luminance.size());
}

/// Product over scales of the mean per-window factor l^beta_m * cs^gamma_m,
/// with both terms present at every scale. Scale m+1 is the 2x2 mean-pooled
/// scale m. With unit exponents each factor is the single-scale SSIM.
inline double ms_ssim(const Image& x, const Image& y, const SsimParams& p = {}) {
  detail::require_same_shape(x, y, "ms_ssim");
  p.validate();
  const std::size_t need = p.window << (p.scales - 1);
  if (std::min(x.width(), x.height()) < need) {
    throw DimensionError("ms_ssim: insufficient resolution for " + std::to_string(p.scales) + " scales (need min side >= " +
                         std::to_string(need) + ")");
  }
  Image a = to_luma(x), b = to_luma(y);
  double result = 1.0;
  for (std::size_t m = 0; m < p.scales; ++m) {
    const auto maps = detail::ssim_maps(a, b, p);
    double s = 0.0;
    for (std::size_t i = 0; i < maps.luminance.size(); ++i) {
      s += detail::power_term(maps.luminance[i], p.beta[m]) *
           detail::power_term(maps.contrast_structure[i], p.gamma[m]);
    }
    result *= s / static_cast<double>(maps.luminance.size());
    if (m + 1 < p.scales) {
      a = downsample2x(a);
      b = downsample2x(b);
    }
  }
  return result;
}

/// Mean absolute difference over C*W*H samples.
inline double l1_image(const Image& x, const Image& y) {
  detail::require_same_shape(x, y, "l1_image");
  const auto a = x.data(), b = y.data();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

inline double depth_l1_loss(const DepthMap& pred, const DepthMap& gt) {
  require_same_size(pred.size(), gt.size(), "depth_l1_loss");
  const auto a = pred.data(), b = gt.data();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

/// Channel minimum followed by a patch x patch minimum filter with
/// edge-replicate borders.
inline DarkChannelMap dark_channel(const Image& img, std::size_t patch = kDefaultDarkChannelPatch) {
  if (patch % 2 == 0) throw Error("dark_channel: patch size must be odd");
  if (patch > std::min(img.width(), img.height())) throw DimensionError("dark_channel: patch larger than image");
  const std::size_t w = img.width(), h = img.height(), ch = img.channels(), r = patch / 2;
  std::vector<double> cmin(w * h);
  for (std::size_t i = 0; i < cmin.size(); ++i) {
    double m = img.data()[i * ch];
    for (std::size_t c = 1; c < ch; ++c) m = std::min(m, img.data()[i * ch + c]);
    cmin[i] = m;
  }
  // A square min filter is separable; clamped indices give edge replication.
  std::vector<double> rows(w * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t lo = x >= r ? x - r : 0, hi = std::min(w - 1, x + r);
      double m = cmin[y * w + lo];
      for (std::size_t k = lo + 1; k <= hi; ++k) m = std::min(m, cmin[y * w + k]);
      rows[y * w + x] = m;
    }
  }
  std::vector<double> out(w * h);
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t lo = y >= r ? y - r : 0, hi = std::min(h - 1, y + r);
    for (std::size_t x = 0; x < w; ++x) {
      double m = rows[lo * w + x];
      for (std::size_t k = lo + 1; k <= hi; ++k) m = std::min(m, rows[k * w + x]);
      out[y * w + x] = m;
    }
  }
  return Image(w, h, 1, std::move(out));
}

/// Mean of the dark channel map.
inline double dc_loss(const Image& img, std::size_t patch = kDefaultDarkChannelPatch) {
  const auto dc = dark_channel(img, patch);
  return detail::mean_of(dc.data());
}

/// Forward differences (zero at the trailing column/row), combined per
/// `variant`, averaged over C*W*H samples.
inline double tv_loss(const Image& img, TvVariant variant = TvVariant::SumThenAbs) {
  const std::size_t w = img.width(), h = img.height(), ch = img.channels();
  double s = 0.0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < ch; ++c) {
        const double v = img.at(x, y, c);
        const double gh = x + 1 < w ? img.at(x + 1, y, c) - v : 0.0;
        const double gv = y + 1 < h ? img.at(x, y + 1, c) - v : 0.0;
        s += variant == TvVariant::SumThenAbs ? std::abs(gh + gv) : std::abs(gh) + std::abs(gv);
      }
    }
  }
  return s / static_cast<double>(img.sample_count());
}

/// Generator objective: mean (s - 1)^2 over fake scores.
inline double lsgan_g_loss(const ScoreBatch& fake) {
  double s = 0.0;
  for (double v : fake.scores()) s += (v - 1.0) * (v - 1.0);
  return s / static_cast<double>(fake.size());
}

/// Discriminator objective: mean (real - 1)^2 + mean fake^2.
inline double lsgan_d_loss(const ScoreBatch& real, const ScoreBatch& fake) {
  double r = 0.0, f = 0.0;
  for (double v : real.scores()) r += (v - 1.0) * (v - 1.0);
  for (double v : fake.scores()) f += v * v;
  return r / static_cast<double>(real.size()) + f / static_cast<double>(fake.size());
}

inline double rec_loss_from_components(double ms_ssim_loss, double l1, const LossWeights& w = {}) {
  return w.alpha_rec * ms_ssim_loss + (1.0 - w.alpha_rec) * l1;
}

/// alpha_rec * (1 - ms_ssim) + (1 - alpha_rec) * L1.
inline double rec_loss(const Image& g, const Image& y, const LossWeights& w = {}, const SsimParams& p = {}) {
  w.validate();
  return rec_loss_from_components(1.0 - ms_ssim(g, y, p), l1_image(g, y), w);
}

inline double total_loss(double depth_l1, double adv_g, double rec, double dc, double tv, const LossWeights& w = {}) {
  for (double v : {depth_l1, adv_g, rec, dc, tv}) detail::require(std::isfinite(v), "total_loss: non-finite component");
  w.validate();
  return depth_l1 + w.lambda1 * adv_g + rec + w.lambda2 * dc + w.lambda3 * tv;
}

/// Per-pair evaluation result. `error` is set when the pair could not be scored.
struct MetricsRecord {
  std::string id;
  double psnr_db = 0.0;
  double ssim = 0.0;
  double ms_ssim = 0.0;
  double l1 = 0.0;
  double dc_loss = 0.0;
  double tv_loss = 0.0;
  double rec_loss = 0.0;
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
};

}  // namespace morkit
