#pragma once

// Forward math of the hybrid normalization block: 3x3 convolution, batch
// normalization on the first half of the channels, instance normalization
// on the second half, channel concatenation and SELU.
//
// Both normalizations use population (1/N) variance. Batch normalization
// always uses the statistics of the batch it is given; there are no running
// averages. Instance normalization carries no affine parameters.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "morkit/error.hpp"
#include "morkit/raster.hpp"

namespace morkit {

struct AffineParams {
  std::vector<double> gamma;
  std::vector<double> beta;

  static AffineParams identity(std::size_t channels) {
    return {std::vector<double>(channels, 1.0), std::vector<double>(channels, 0.0)};
  }
};

struct SeluConstants {
  static constexpr double lambda = 1.0507009873554805;
  static constexpr double alpha = 1.6732632423543772;
};

inline constexpr double kDefaultNormEps = 1e-5;

/// C_out x C_in x 3 x 3 convolution weights.
class Kernel3x3 {
 public:
  Kernel3x3(std::size_t c_out, std::size_t c_in, std::vector<double> weights)
      : c_out_(c_out), c_in_(c_in), weights_(std::move(weights)) {
    if (c_out == 0 || c_in == 0) throw DimensionError("Kernel3x3: zero channel count");
    if (weights_.size() != c_out * c_in * 9) throw DimensionError("Kernel3x3: weight count must be C_out*C_in*9");
    for (double v : weights_) detail::require(std::isfinite(v), "Kernel3x3: non-finite weight");
  }

  static Kernel3x3 zeros(std::size_t c_out, std::size_t c_in) {
    return Kernel3x3(c_out, c_in, std::vector<double>(c_out * c_in * 9, 0.0));
  }

  /// Center tap 1 from input channel c to output channel c.
  static Kernel3x3 identity(std::size_t channels) {
    std::vector<double> w(channels * channels * 9, 0.0);
    for (std::size_t c = 0; c < channels; ++c) w[(c * channels + c) * 9 + 4] = 1.0;
    return Kernel3x3(channels, channels, std::move(w));
  }

  std::size_t c_out() const { return c_out_; }
  std::size_t c_in() const { return c_in_; }
  double at(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) const {
    return weights_[((o * c_in_ + i) * 3 + ky) * 3 + kx];
  }

 private:
  std::size_t c_out_, c_in_;
  std::vector<double> weights_;
};

/// Stride-1 cross-correlation with zero padding 1.
inline Tensor4 conv3x3(const Tensor4& x, const Kernel3x3& k) {
  if (k.c_in() != x.c()) throw DimensionError("conv3x3: kernel C_in does not match input channels");
  const std::size_t n = x.n(), co = k.c_out(), ci = x.c(), h = x.h(), w = x.w();
  std::vector<double> out(n * co * h * w, 0.0);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t o = 0; o < co; ++o) {
      double* dst = out.data() + (b * co + o) * h * w;
      for (std::size_t i = 0; i < ci; ++i) {
        for (std::size_t ky = 0; ky < 3; ++ky) {
          for (std::size_t kx = 0; kx < 3; ++kx) {
            const double wt = k.at(o, i, ky, kx);
            if (wt == 0.0) continue;
            for (std::size_t y = 0; y < h; ++y) {
              const long long sy = static_cast<long long>(y + ky) - 1;
              if (sy < 0 || sy >= static_cast<long long>(h)) continue;
              for (std::size_t xx = 0; xx < w; ++xx) {
                const long long sx = static_cast<long long>(xx + kx) - 1;
                if (sx < 0 || sx >= static_cast<long long>(w)) continue;
                dst[y * w + xx] += wt * x.at(b, i, static_cast<std::size_t>(sy), static_cast<std::size_t>(sx));
              }
            }
          }
        }
      }
    }
  }
  return Tensor4(n, co, h, w, std::move(out));
}

/// Per channel over (N, H, W): gamma_c (x - mu_c) / sqrt(var_c + eps) + beta_c.
inline Tensor4 batch_norm(const Tensor4& x, const AffineParams& a, double eps = kDefaultNormEps) {
  if (a.gamma.size() != x.c() || a.beta.size() != x.c()) {
    throw DimensionError("batch_norm: affine parameter length does not match channel count");
  }
  detail::require(eps >= 0.0 && std::isfinite(eps), "batch_norm: eps must be >= 0");
  std::vector<double> out(x.data().begin(), x.data().end());
  const double count = static_cast<double>(x.n() * x.plane());
  for (std::size_t c = 0; c < x.c(); ++c) {
    double sum = 0.0;
    for (std::size_t b = 0; b < x.n(); ++b) {
      for (double v : x.plane(b, c)) sum += v;
    }
    const double mean = sum / count;
    double sq = 0.0;
    for (std::size_t b = 0; b < x.n(); ++b) {
      for (double v : x.plane(b, c)) sq += (v - mean) * (v - mean);
    }
    const double inv = 1.0 / std::sqrt(sq / count + eps);
    for (std::size_t b = 0; b < x.n(); ++b) {
      double* p = out.data() + x.index(b, c, 0, 0);
      for (std::size_t i = 0; i < x.plane(); ++i) p[i] = a.gamma[c] * (p[i] - mean) * inv + a.beta[c];
    }
  }
  return Tensor4(x.n(), x.c(), x.h(), x.w(), std::move(out));
}

/// Per (n, c) over (H, W), no affine.
inline Tensor4 instance_norm(const Tensor4& x, double eps = kDefaultNormEps) {
  detail::require(eps >= 0.0 && std::isfinite(eps), "instance_norm: eps must be >= 0");
  std::vector<double> out(x.data().begin(), x.data().end());
  const double count = static_cast<double>(x.plane());
  for (std::size_t b = 0; b < x.n(); ++b) {
    for (std::size_t c = 0; c < x.c(); ++c) {
      const auto src = x.plane(b, c);
      double sum = 0.0;
      for (double v : src) sum += v;
      const double mean = sum / count;
      double sq = 0.0;
      for (double v : src) sq += (v - mean) * (v - mean);
      const double inv = 1.0 / std::sqrt(sq / count + eps);
      double* p = out.data() + x.index(b, c, 0, 0);
      for (std::size_t i = 0; i < src.size(); ++i) p[i] = (p[i] - mean) * inv;
    }
  }
  return Tensor4(x.n(), x.c(), x.h(), x.w(), std::move(out));
}

inline double selu(double v) {
  return v > 0.0 ? SeluConstants::lambda * v : SeluConstants::lambda * SeluConstants::alpha * std::expm1(v);
}

inline Tensor4 selu(const Tensor4& x) {
  std::vector<double> out(x.data().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = selu(x.data()[i]);
  return Tensor4(x.n(), x.c(), x.h(), x.w(), std::move(out));
}

/// Channels [lo, hi) of x.
inline Tensor4 slice_channels(const Tensor4& x, std::size_t lo, std::size_t hi) {
  if (lo >= hi || hi > x.c()) throw DimensionError("slice_channels: bad channel range");
  const std::size_t c = hi - lo;
  std::vector<double> out;
  out.reserve(x.n() * c * x.plane());
  for (std::size_t b = 0; b < x.n(); ++b) {
    for (std::size_t ch = lo; ch < hi; ++ch) {
      const auto p = x.plane(b, ch);
      out.insert(out.end(), p.begin(), p.end());
    }
  }
  return Tensor4(x.n(), c, x.h(), x.w(), std::move(out));
}

/// Concatenation along the channel axis, `a` first.
inline Tensor4 concat_channels(const Tensor4& a, const Tensor4& b) {
  if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w()) throw DimensionError("concat_channels: shape mismatch");
  std::vector<double> out;
  out.reserve(a.data().size() + b.data().size());
  for (std::size_t n = 0; n < a.n(); ++n) {
    for (std::size_t c = 0; c < a.c(); ++c) {
      const auto p = a.plane(n, c);
      out.insert(out.end(), p.begin(), p.end());
    }
    for (std::size_t c = 0; c < b.c(); ++c) {
      const auto p = b.plane(n, c);
      out.insert(out.end(), p.begin(), p.end());
    }
  }
  return Tensor4(a.n(), a.c() + b.c(), a.h(), a.w(), std::move(out));
}

struct HnbOutput {
  Tensor4 pre_activation;
  Tensor4 out;
};

/// Batch norm (with `a`) on channels [0, C/2), instance norm on [C/2, C),
/// concatenated in order, then SELU.
inline HnbOutput hnb_normalize(const Tensor4& x_mid, const AffineParams& a, double eps = kDefaultNormEps) {
  if (x_mid.c() % 2 != 0) throw DimensionError("channel count must be even for HNB split");
  const std::size_t half = x_mid.c() / 2;
  auto bn = batch_norm(slice_channels(x_mid, 0, half), a, eps);
  auto in = instance_norm(slice_channels(x_mid, half, x_mid.c()), eps);
  HnbOutput r{concat_channels(bn, in), {}};
  r.out = selu(r.pre_activation);
  return r;
}

inline Tensor4 hnb_block(const Tensor4& x_in, const Kernel3x3& kernel, const AffineParams& a,
                         double eps = kDefaultNormEps) {
  return hnb_normalize(conv3x3(x_in, kernel), a, eps).out;
}

}  // namespace morkit
