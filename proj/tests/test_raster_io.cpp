#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <vector>

#include "morkit/io.hpp"
#include "morkit/raster.hpp"
#include "morkit/reference.hpp"
#include "test_util.hpp"

using namespace morkit;
using morkit::testing::TempDir;

namespace {

void write_raw_png(const std::filesystem::path& p, std::uint32_t w, std::uint32_t h, int channels, int bits,
                   std::vector<std::uint8_t> pixels) {
  detail::PngRaw raw;
  raw.width = w;
  raw.height = h;
  raw.channels = channels;
  raw.bits = bits;
  raw.pixels = std::move(pixels);
  detail::write_png_raw(p, raw);
}

}  // namespace

TEST(Image, RejectsOutOfRangeAndBadShapes) {
  EXPECT_THROW(Image(2, 2, 1, std::vector<double>{0, 0.5, 1.5, 0}), Error);
  EXPECT_THROW(Image(2, 2, 1, std::vector<double>{0, 0.5, NAN, 0}), Error);
  EXPECT_THROW(Image(2, 2, 2, 0.0), DimensionError);
  EXPECT_THROW(Image(2, 2, 1, std::vector<double>{0, 0}), DimensionError);
  EXPECT_THROW(Image(0, 2, 1, 0.0), DimensionError);
  EXPECT_NO_THROW(Image(2, 1, 3, 1.0));
}

TEST(DepthMap, RejectsNegativeAndNonFinite) {
  EXPECT_THROW(DepthMap(1, 2, {0.0, -1.0}), Error);
  EXPECT_THROW(DepthMap(1, 2, {0.0, INFINITY}), Error);
  EXPECT_THROW(DepthMap(1, 1, {1.0}, 0.0), Error);
}

TEST(TransmissionMap, RequiresOpenClosedUnitInterval) {
  EXPECT_THROW(TransmissionMap(1, 1, {0.0}), Error);
  EXPECT_THROW(TransmissionMap(1, 1, {1.0000001}), Error);
  EXPECT_NO_THROW(TransmissionMap(1, 1, {1.0}));
}

TEST(Tensor4, LengthMustMatchDims) {
  EXPECT_THROW(Tensor4(1, 2, 2, 2, std::vector<double>(7)), DimensionError);
  const Tensor4 t(2, 3, 4, 5, 0.0);
  EXPECT_EQ(t.index(1, 2, 3, 4), t.data().size() - 1);
}

TEST(Downsample2x, ConstantStaysConstant) {
  const Image img(8, 6, 3, 0.37);
  const Image half = downsample2x(img);
  EXPECT_EQ(half.width(), 4u);
  EXPECT_EQ(half.height(), 3u);
  for (double v : half.data()) EXPECT_DOUBLE_EQ(v, 0.37);
}

TEST(Downsample2x, TwoByTwoBlockAverages) {
  const Image img(2, 2, 1, std::vector<double>{0, 1, 1, 0});
  const Image half = downsample2x(img);
  ASSERT_EQ(half.sample_count(), 1u);
  EXPECT_EQ(half.data()[0], 0.5);
}

TEST(Downsample2x, OddTrailingRowAndColumnDropped) {
  const Image img(3, 3, 1, std::vector<double>{0, 0, 1, 0, 0, 1, 1, 1, 1});
  const Image half = downsample2x(img);
  EXPECT_EQ(half.width(), 1u);
  EXPECT_EQ(half.height(), 1u);
  EXPECT_EQ(half.data()[0], 0.0);
  EXPECT_THROW(downsample2x(Image(1, 5, 1, 0.0)), DimensionError);
}

TEST(Downsample2x, PreservesMeanOnEvenSizes) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Image img = reference::random_image(16 + 2 * (seed % 5), 10 + 2 * (seed % 3), 3, seed);
    const Image half = downsample2x(img);
    EXPECT_NEAR(detail::mean_of(img.data()), detail::mean_of(half.data()), 1e-12);
  }
}

TEST(Quantize, RoundHalfUp) {
  EXPECT_EQ(quantize(0.5, 8), 128u);
  EXPECT_EQ(quantize(0.0, 8), 0u);
  EXPECT_EQ(quantize(1.0, 8), 255u);
  EXPECT_EQ(quantize(1.0, 16), 65535u);
  EXPECT_EQ(dequantize(32768, 16), 32768.0 / 65535.0);
}

TEST(Png, EightBitFullScaleAndZero) {
  TempDir dir;
  write_raw_png(dir / "a.png", 2, 1, 1, 8, {255, 0});
  const Image img = load_image(dir / "a.png");
  EXPECT_EQ(img.channels(), 1u);
  EXPECT_EQ(img.data()[0], 1.0);
  EXPECT_EQ(img.data()[1], 0.0);
}

TEST(Png, SixteenBitMidpoint) {
  TempDir dir;
  write_raw_png(dir / "a.png", 1, 1, 1, 16, {0x80, 0x00});
  const Image img = load_image(dir / "a.png");
  EXPECT_EQ(img.data()[0], 0.5000076295109483);  // 32768 / 65535
}

TEST(Png, HalfStoredAs128) {
  TempDir dir;
  save_image(Image(1, 1, 1, 0.5), dir / "h.png", 8);
  const auto raw = detail::read_png_raw(dir / "h.png");
  EXPECT_EQ(raw.pixels[0], 128);
}

TEST(Png, AllZerosImageGivesZeroSamples) {
  TempDir dir;
  save_image(Image(5, 4, 3, 0.0), dir / "z.png", 16);
  const auto raw = detail::read_png_raw(dir / "z.png");
  for (auto b : raw.pixels) EXPECT_EQ(b, 0);
}

// Round trip is the identity on the 8- and 16-bit lattices.
TEST(Png, LatticeRoundTripIsIdentity) {
  TempDir dir;
  for (int bits : {8, 16}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      CounterRng rng(seed);
      const std::size_t w = 3 + seed, h = 2 + seed % 4, ch = seed % 2 ? 3 : 1;
      std::vector<double> v(w * h * ch);
      const std::uint32_t maxv = (1u << bits) - 1;
      for (double& x : v) x = dequantize(static_cast<std::uint32_t>(rng.next_u64() % (maxv + 1)), bits);
      const Image img(w, h, ch, v);
      save_image(img, dir / "rt.png", bits);
      EXPECT_EQ(load_image(dir / "rt.png"), img) << "bits=" << bits << " seed=" << seed;
    }
  }
}

TEST(Png, ErrorsCarryPathAndCause) {
  TempDir dir;
  try {
    load_image(dir / "missing.png");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("missing.png"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("does not exist"), std::string::npos);
  }
  write_raw_png(dir / "rgba.png", 1, 1, 4, 8, {1, 2, 3, 4});
  EXPECT_THROW(load_image(dir / "rgba.png"), IoError);
  write_raw_png(dir / "four.png", 2, 1, 1, 4, {0x12});
  try {
    load_image(dir / "four.png");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("bit depth"), std::string::npos);
  }
  {
    std::ofstream f(dir / "corrupt.png", std::ios::binary);
    const unsigned char sig[] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A, 0, 0, 0, 13, 'I', 'H'};
    f.write(reinterpret_cast<const char*>(sig), sizeof(sig));
  }
  EXPECT_THROW(load_image(dir / "corrupt.png"), IoError);
  EXPECT_THROW(save_image(Image(1, 1, 1, 0.0), dir / "no" / "such" / "dir.png"), IoError);
}

TEST(Depth, Png16ScaledBySuppliedStep) {
  TempDir dir;
  write_raw_png(dir / "d.png", 1, 1, 1, 16, {0x03, 0xE8});  // 1000
  const DepthMap d = load_depth(dir / "d.png", DepthConvention::Png16, 0.1);
  EXPECT_DOUBLE_EQ(d.data()[0], 100.0);
  EXPECT_THROW(load_depth(dir / "d.png", DepthConvention::Png16, 0.0), Error);
  write_raw_png(dir / "d8.png", 1, 1, 1, 8, {10});
  EXPECT_THROW(load_depth(dir / "d8.png", DepthConvention::Png16, 1.0), IoError);
}

TEST(Depth, PfmZerosAndVerbatimValues) {
  TempDir dir;
  write_pfm(dir / "z.pfm", 3, 2, std::vector<double>(6, 0.0));
  const DepthMap z = load_depth(dir / "z.pfm", DepthConvention::Pfm);
  for (double v : z.data()) EXPECT_EQ(v, 0.0);

  const std::vector<double> vals{1.5, 2.25, 100.0, 0.0, 7.0, 3.0};
  write_pfm(dir / "v.pfm", 3, 2, vals);
  const DepthMap d = load_depth(dir / "v.pfm", DepthConvention::Pfm);
  EXPECT_EQ(std::vector<double>(d.data().begin(), d.data().end()), vals);
  EXPECT_EQ(d.at(2, 0), 100.0);  // rows come back top-first
}

TEST(Depth, PfmNegativeRejected) {
  TempDir dir;
  write_pfm(dir / "n.pfm", 2, 1, std::vector<double>{0.0, -1.0});
  try {
    load_depth(dir / "n.pfm", DepthConvention::Pfm);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("negative depth"), std::string::npos);
  }
}

TEST(Depth, PfmBigEndianHeader) {
  TempDir dir;
  // Two float32 values, big-endian (positive scale), bottom row first.
  std::ofstream f(dir / "be.pfm", std::ios::binary);
  f << "Pf\n1 2\n1.0\n";
  const unsigned char bottom[] = {0x40, 0x00, 0x00, 0x00};  // 2.0f
  const unsigned char top[] = {0x3F, 0x80, 0x00, 0x00};     // 1.0f
  f.write(reinterpret_cast<const char*>(bottom), 4);
  f.write(reinterpret_cast<const char*>(top), 4);
  f.close();
  const DepthMap d = load_depth(dir / "be.pfm", DepthConvention::Pfm);
  EXPECT_EQ(d.at(0, 0), 1.0);
  EXPECT_EQ(d.at(0, 1), 2.0);
}

TEST(Depth, PfmZeroDimensionAndColorRejected) {
  TempDir dir;
  {
    std::ofstream f(dir / "zero.pfm", std::ios::binary);
    f << "Pf\n0 2\n-1.0\n";
  }
  EXPECT_THROW(load_depth(dir / "zero.pfm", DepthConvention::Pfm), IoError);
  {
    std::ofstream f(dir / "color.pfm", std::ios::binary);
    f << "PF\n1 1\n-1.0\n";
  }
  EXPECT_THROW(load_depth(dir / "color.pfm", DepthConvention::Pfm), IoError);
}
