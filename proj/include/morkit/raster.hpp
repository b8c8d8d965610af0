#pragma once

// Raster containers shared by the synthesis, metric and normalization code.
//
// All containers store doubles in row-major order. An Image is interleaved
// (HWC); a Tensor4 is NCHW. Containers validate their invariants on
// construction and are immutable afterwards.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "morkit/error.hpp"

namespace morkit {

struct Size {
  std::size_t width = 0;
  std::size_t height = 0;

  std::size_t area() const { return width * height; }
  friend bool operator==(const Size&, const Size&) = default;
};

inline std::string to_string(Size s) {
  return std::to_string(s.width) + "x" + std::to_string(s.height);
}

inline void require_same_size(Size a, Size b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + to_string(a) + " vs " +
                         to_string(b) + ")");
  }
}

/// H x W x C intensity raster, C in {1, 3}, every sample finite and in [0, 1].
class Image {
 public:
  Image() = default;

  Image(std::size_t width, std::size_t height, std::size_t channels, double fill = 0.0)
      : Image(width, height, channels, std::vector<double>(width * height * channels, fill)) {}

  Image(std::size_t width, std::size_t height, std::size_t channels, std::vector<double> data)
      : size_{width, height}, channels_(channels), data_(std::move(data)) {
    if (width == 0 || height == 0) throw DimensionError("Image: zero dimension");
    if (channels != 1 && channels != 3) throw DimensionError("Image: channels must be 1 or 3");
    if (data_.size() != width * height * channels) {
      throw DimensionError("Image: data length does not equal H*W*C");
    }
    for (double v : data_) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw Error("Image: sample outside [0,1] or non-finite");
      }
    }
  }

  std::size_t width() const { return size_.width; }
  std::size_t height() const { return size_.height; }
  std::size_t channels() const { return channels_; }
  Size size() const { return size_; }
  std::size_t sample_count() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return data_[(y * size_.width + x) * channels_ + c];
  }

  std::span<const double> data() const { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  Size size_;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

/// Scene depth in dataset-defined units; every value finite and >= 0.
class DepthMap {
 public:
  DepthMap() = default;

  DepthMap(std::size_t width, std::size_t height, std::vector<double> data, double unit_scale = 1.0)
      : size_{width, height}, data_(std::move(data)), unit_scale_(unit_scale) {
    if (width == 0 || height == 0) throw DimensionError("DepthMap: zero dimension");
    if (data_.size() != width * height) throw DimensionError("DepthMap: data length does not equal H*W");
    if (!(unit_scale_ > 0.0) || !std::isfinite(unit_scale_)) throw Error("DepthMap: unit_scale must be > 0");
    for (double v : data_) {
      if (!std::isfinite(v)) throw Error("DepthMap: non-finite depth");
      if (v < 0.0) throw Error("DepthMap: negative depth");
    }
  }

  std::size_t width() const { return size_.width; }
  std::size_t height() const { return size_.height; }
  Size size() const { return size_; }
  double unit_scale() const { return unit_scale_; }
  double at(std::size_t x, std::size_t y) const { return data_[y * size_.width + x]; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const DepthMap&, const DepthMap&) = default;

 private:
  Size size_;
  std::vector<double> data_;
  double unit_scale_ = 1.0;
};

/// Pointwise transmission factor in (0, 1].
class TransmissionMap {
 public:
  TransmissionMap() = default;

  TransmissionMap(std::size_t width, std::size_t height, std::vector<double> data)
      : size_{width, height}, data_(std::move(data)) {
    if (width == 0 || height == 0) throw DimensionError("TransmissionMap: zero dimension");
    if (data_.size() != width * height) throw DimensionError("TransmissionMap: data length does not equal H*W");
    for (double v : data_) {
      if (!(v > 0.0 && v <= 1.0)) throw Error("TransmissionMap: value outside (0,1]");
    }
  }

  std::size_t width() const { return size_.width; }
  std::size_t height() const { return size_.height; }
  Size size() const { return size_; }
  double at(std::size_t x, std::size_t y) const { return data_[y * size_.width + x]; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const TransmissionMap&, const TransmissionMap&) = default;

 private:
  Size size_;
  std::vector<double> data_;
};

/// NCHW feature tensor with finite values.
class Tensor4 {
 public:
  Tensor4() = default;

  Tensor4(std::size_t n, std::size_t c, std::size_t h, std::size_t w, std::vector<double> data)
      : n_(n), c_(c), h_(h), w_(w), data_(std::move(data)) {
    if (n == 0 || c == 0 || h == 0 || w == 0) throw DimensionError("Tensor4: zero dimension");
    if (data_.size() != n * c * h * w) throw DimensionError("Tensor4: data length does not equal N*C*H*W");
    for (double v : data_) {
      if (!std::isfinite(v)) throw Error("Tensor4: non-finite value");
    }
  }

  Tensor4(std::size_t n, std::size_t c, std::size_t h, std::size_t w, double fill = 0.0)
      : Tensor4(n, c, h, w, std::vector<double>(n * c * h * w, fill)) {}

  std::size_t n() const { return n_; }
  std::size_t c() const { return c_; }
  std::size_t h() const { return h_; }
  std::size_t w() const { return w_; }
  std::size_t plane() const { return h_ * w_; }

  std::size_t index(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
    return ((n * c_ + c) * h_ + y) * w_ + x;
  }
  double at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
    return data_[index(n, c, y, x)];
  }

  std::span<const double> data() const { return data_; }
  // Contiguous H*W plane for instance n, channel c.
  std::span<const double> plane(std::size_t n, std::size_t c) const {
    return std::span<const double>(data_).subspan(index(n, c, 0, 0), plane());
  }

  friend bool operator==(const Tensor4&, const Tensor4&) = default;

 private:
  std::size_t n_ = 0, c_ = 0, h_ = 0, w_ = 0;
  std::vector<double> data_;
};

/// Non-overlapping 2x2 mean pooling; a trailing odd row or column is dropped.
inline Image downsample2x(const Image& img) {
  if (img.width() < 2 || img.height() < 2) throw DimensionError("downsample2x: image smaller than 2x2");
  const std::size_t w = img.width() / 2, h = img.height() / 2, ch = img.channels();
  std::vector<double> out(w * h * ch);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < ch; ++c) {
        const double s = img.at(2 * x, 2 * y, c) + img.at(2 * x + 1, 2 * y, c) +
                         img.at(2 * x, 2 * y + 1, c) + img.at(2 * x + 1, 2 * y + 1, c);
        out[(y * w + x) * ch + c] = 0.25 * s;
      }
    }
  }
  return Image(w, h, ch, std::move(out));
}

/// Single channel view of an image: the channel itself for gray input,
/// BT.601 luma (0.299 R + 0.587 G + 0.114 B) for RGB.
inline Image to_luma(const Image& img) {
  if (img.channels() == 1) return img;
  std::vector<double> out(img.size().area());
  const auto d = img.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = 0.299 * d[3 * i] + 0.587 * d[3 * i + 1] + 0.114 * d[3 * i + 2];
    out[i] = std::clamp(v, 0.0, 1.0);
  }
  return Image(img.width(), img.height(), 1, std::move(out));
}

}  // namespace morkit
