#pragma once

// PNG (8/16-bit gray or RGB) and PFM raster I/O.
//
// PNG samples map to [0,1] as v / (2^bits - 1). Saving quantizes with
// round-half-up, floor(v * (2^bits - 1) + 0.5), so a raster already on the
// lattice round-trips bit-exactly.

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "morkit/error.hpp"
#include "morkit/raster.hpp"

namespace morkit {

enum class DepthConvention { Pfm, Png16 };

namespace detail {

inline std::string path_msg(const std::filesystem::path& p, const std::string& cause) {
  return p.string() + ": " + cause;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path_msg(path, "cannot open file"));
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file_bytes(const std::filesystem::path& path, const void* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path_msg(path, "cannot open file for writing"));
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw IoError(path_msg(path, "write failed"));
}

struct PngRaw {
  std::uint32_t width = 0, height = 0;
  int channels = 0;
  int bits = 0;
  std::vector<std::uint8_t> pixels;  // big-endian samples for 16-bit
};

inline std::size_t row_bytes(const PngRaw& raw) {
  return (static_cast<std::size_t>(raw.width) * raw.channels * raw.bits + 7) / 8;
}

struct PngIoContext {
  const std::vector<std::uint8_t>* in = nullptr;
  std::size_t offset = 0;
  std::vector<std::uint8_t>* out = nullptr;
  char message[256] = {};
};

extern "C" inline void png_error_to_context(png_structp png, png_const_charp msg) {
  auto* ctx = static_cast<PngIoContext*>(png_get_error_ptr(png));
  std::snprintf(ctx->message, sizeof(ctx->message), "%s", msg);
  png_longjmp(png, 1);
}

extern "C" inline void png_warning_ignore(png_structp, png_const_charp) {}

extern "C" inline void png_read_from_context(png_structp png, png_bytep dst, png_size_t n) {
  auto* ctx = static_cast<PngIoContext*>(png_get_io_ptr(png));
  if (ctx->offset + n > ctx->in->size()) png_error(png, "truncated stream");
  std::memcpy(dst, ctx->in->data() + ctx->offset, n);
  ctx->offset += n;
}

extern "C" inline void png_write_to_context(png_structp png, png_bytep src, png_size_t n) {
  auto* ctx = static_cast<PngIoContext*>(png_get_io_ptr(png));
  ctx->out->insert(ctx->out->end(), src, src + n);
}

extern "C" inline void png_flush_noop(png_structp) {}

// Decodes into `raw`; returns false with ctx.message set on failure. Objects
// touched after setjmp live in the caller's frame.
inline bool png_decode(PngIoContext& ctx, PngRaw& raw, std::vector<png_bytep>& rows) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &ctx, png_error_to_context, png_warning_ignore);
  if (!png) {
    std::snprintf(ctx.message, sizeof(ctx.message), "out of memory");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &ctx, png_read_from_context);
  png_read_info(png, info);
  raw.width = png_get_image_width(png, info);
  raw.height = png_get_image_height(png, info);
  raw.bits = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_GRAY) {
    raw.channels = 1;
  } else if (color == PNG_COLOR_TYPE_RGB) {
    raw.channels = 3;
  } else {
    png_error(png, "unsupported channel layout (need gray or RGB without alpha or palette)");
  }
  if (raw.bits != 8 && raw.bits != 16) png_error(png, "unsupported bit depth (need 8 or 16)");
  if (raw.width == 0 || raw.height == 0) png_error(png, "zero dimension");
  // Interlaced files still decode correctly via png_read_image.
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  const std::size_t stride = row_bytes(raw);
  raw.pixels.resize(stride * raw.height);
  rows.resize(raw.height);
  for (std::size_t y = 0; y < raw.height; ++y) rows[y] = raw.pixels.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

inline bool png_encode(PngIoContext& ctx, const PngRaw& raw, std::vector<png_bytep>& rows) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &ctx, png_error_to_context, png_warning_ignore);
  if (!png) {
    std::snprintf(ctx.message, sizeof(ctx.message), "out of memory");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &ctx, png_write_to_context, png_flush_noop);
  const int color = raw.channels == 1   ? PNG_COLOR_TYPE_GRAY
                    : raw.channels == 2 ? PNG_COLOR_TYPE_GRAY_ALPHA
                    : raw.channels == 3 ? PNG_COLOR_TYPE_RGB
                                        : PNG_COLOR_TYPE_RGB_ALPHA;
  png_set_IHDR(png, info, raw.width, raw.height, raw.bits, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = row_bytes(raw);
  rows.resize(raw.height);
  for (std::size_t y = 0; y < raw.height; ++y) {
    rows[y] = const_cast<png_bytep>(raw.pixels.data() + y * stride);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

inline PngRaw read_png_raw(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError(path_msg(path, "file does not exist"));
  const auto bytes = read_file_bytes(path);
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw IoError(path_msg(path, "corrupt stream (not a PNG signature)"));
  }
  PngIoContext ctx;
  ctx.in = &bytes;
  PngRaw raw;
  std::vector<png_bytep> rows;
  if (!png_decode(ctx, raw, rows)) throw IoError(path_msg(path, ctx.message));
  return raw;
}

inline void write_png_raw(const std::filesystem::path& path, const PngRaw& raw) {
  std::vector<std::uint8_t> encoded;
  PngIoContext ctx;
  ctx.out = &encoded;
  std::vector<png_bytep> rows;
  if (!png_encode(ctx, raw, rows)) throw IoError(path_msg(path, ctx.message));
  write_file_bytes(path, encoded.data(), encoded.size());
}

inline std::uint32_t raw_sample(const PngRaw& raw, std::size_t i) {
  if (raw.bits == 8) return raw.pixels[i];
  return (static_cast<std::uint32_t>(raw.pixels[2 * i]) << 8) | raw.pixels[2 * i + 1];
}

}  // namespace detail

/// Round-half-up quantization of a [0,1] value to an integer sample.
inline std::uint32_t quantize(double v, int bits) {
  const double maxv = static_cast<double>((1u << bits) - 1u);
  const double q = std::floor(std::clamp(v, 0.0, 1.0) * maxv + 0.5);
  return static_cast<std::uint32_t>(q);
}

inline double dequantize(std::uint32_t sample, int bits) {
  return static_cast<double>(sample) / static_cast<double>((1u << bits) - 1u);
}

/// Value obtained after a save/load round trip at the given bit depth.
inline double quantized_value(double v, int bits) { return dequantize(quantize(v, bits), bits); }

inline Image load_image(const std::filesystem::path& path) {
  const auto raw = detail::read_png_raw(path);
  const std::size_t n = static_cast<std::size_t>(raw.width) * raw.height * raw.channels;
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = dequantize(detail::raw_sample(raw, i), raw.bits);
  return Image(raw.width, raw.height, static_cast<std::size_t>(raw.channels), std::move(data));
}

inline void save_image(const Image& img, const std::filesystem::path& path, int bits = 8) {
  if (bits != 8 && bits != 16) throw Error("save_image: bits must be 8 or 16");
  if (img.empty()) throw Error("save_image: empty image");
  detail::PngRaw raw;
  raw.width = static_cast<std::uint32_t>(img.width());
  raw.height = static_cast<std::uint32_t>(img.height());
  raw.channels = static_cast<int>(img.channels());
  raw.bits = bits;
  const auto d = img.data();
  raw.pixels.resize(d.size() * (bits / 8));
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::uint32_t q = quantize(d[i], bits);
    if (bits == 8) {
      raw.pixels[i] = static_cast<std::uint8_t>(q);
    } else {
      raw.pixels[2 * i] = static_cast<std::uint8_t>(q >> 8);
      raw.pixels[2 * i + 1] = static_cast<std::uint8_t>(q & 0xFFu);
    }
  }
  detail::write_png_raw(path, raw);
}

/// Single-channel float plane as read from or written to a PFM file.
struct PfmPlane {
  std::size_t width = 0, height = 0;
  std::vector<double> data;  // row-major, top row first
};

inline PfmPlane read_pfm(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError(detail::path_msg(path, "file does not exist"));
  const auto bytes = detail::read_file_bytes(path);
  // Header: three whitespace-separated tokens after the magic.
  std::size_t pos = 0;
  auto next_token = [&]() {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    std::string tok;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(static_cast<char>(bytes[pos++]));
    return tok;
  };
  const std::string magic = next_token();
  if (magic == "PF") throw IoError(detail::path_msg(path, "unsupported channel count (color PFM)"));
  if (magic != "Pf") throw IoError(detail::path_msg(path, "corrupt stream (bad PFM magic)"));
  long long w = 0, h = 0;
  double scale = 0.0;
  try {
    w = std::stoll(next_token());
    h = std::stoll(next_token());
    scale = std::stod(next_token());
  } catch (const std::exception&) {
    throw IoError(detail::path_msg(path, "corrupt stream (bad PFM header)"));
  }
  ++pos;  // single whitespace byte before the raster
  if (w <= 0 || h <= 0) throw IoError(detail::path_msg(path, "dimension zero"));
  if (scale == 0.0 || !std::isfinite(scale)) throw IoError(detail::path_msg(path, "corrupt stream (bad PFM scale)"));
  const bool little = scale < 0.0;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() < pos + 4 * n) throw IoError(detail::path_msg(path, "corrupt stream (truncated PFM raster)"));
  PfmPlane plane{static_cast<std::size_t>(w), static_cast<std::size_t>(h), std::vector<double>(n)};
  for (std::size_t row = 0; row < plane.height; ++row) {
    // PFM scanlines run bottom to top.
    const std::size_t dst_row = plane.height - 1 - row;
    for (std::size_t x = 0; x < plane.width; ++x) {
      const std::uint8_t* p = bytes.data() + pos + 4 * (row * plane.width + x);
      std::uint32_t bits = little ? (std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
                                     std::uint32_t{p[3]} << 24)
                                  : (std::uint32_t{p[3]} | std::uint32_t{p[2]} << 8 | std::uint32_t{p[1]} << 16 |
                                     std::uint32_t{p[0]} << 24);
      plane.data[dst_row * plane.width + x] = static_cast<double>(std::bit_cast<float>(bits));
    }
  }
  return plane;
}

/// Writes a little-endian single-channel PFM (values stored as float32).
inline void write_pfm(const std::filesystem::path& path, std::size_t width, std::size_t height,
                      std::span<const double> data) {
  if (width == 0 || height == 0 || data.size() != width * height) throw DimensionError("write_pfm: bad dimensions");
  std::ostringstream header;
  header << "Pf\n" << width << ' ' << height << "\n-1.0\n";
  std::string out = header.str();
  const std::size_t off = out.size();
  out.resize(off + 4 * data.size());
  for (std::size_t row = 0; row < height; ++row) {
    const std::size_t src_row = height - 1 - row;
    for (std::size_t x = 0; x < width; ++x) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(data[src_row * width + x]));
      char* p = out.data() + off + 4 * (row * width + x);
      p[0] = static_cast<char>(bits & 0xFFu);
      p[1] = static_cast<char>((bits >> 8) & 0xFFu);
      p[2] = static_cast<char>((bits >> 16) & 0xFFu);
      p[3] = static_cast<char>((bits >> 24) & 0xFFu);
    }
  }
  detail::write_file_bytes(path, out.data(), out.size());
}

/// Loads scene depth. PFM values are taken verbatim; 16-bit PNG integer
/// samples are multiplied by `scale` (depth units per integer step).
inline DepthMap load_depth(const std::filesystem::path& path, DepthConvention convention, double scale = 1.0) {
  std::size_t w = 0, h = 0;
  std::vector<double> data;
  if (convention == DepthConvention::Pfm) {
    auto plane = read_pfm(path);
    w = plane.width;
    h = plane.height;
    data = std::move(plane.data);
  } else {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      throw Error(detail::path_msg(path, "depth PNG requires a positive --depth-scale"));
    }
    const auto raw = detail::read_png_raw(path);
    if (raw.bits != 16 || raw.channels != 1) {
      throw IoError(detail::path_msg(path, "depth PNG must be 16-bit single channel"));
    }
    w = raw.width;
    h = raw.height;
    data.resize(w * h);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<double>(detail::raw_sample(raw, i)) * scale;
  }
  for (double v : data) {
    if (!std::isfinite(v)) throw Error(detail::path_msg(path, "non-finite depth"));
    if (v < 0.0) throw Error(detail::path_msg(path, "negative depth"));
  }
  return DepthMap(w, h, std::move(data));
}

/// Picks the depth convention from the file extension (.pfm or .png).
inline DepthMap load_depth_auto(const std::filesystem::path& path, double png_scale) {
  const auto ext = path.extension().string();
  if (ext == ".pfm" || ext == ".PFM") return load_depth(path, DepthConvention::Pfm);
  return load_depth(path, DepthConvention::Png16, png_scale);
}

}  // namespace morkit
