#include <gtest/gtest.h>

#include <cmath>

#include "morkit/norm.hpp"
#include "morkit/reference.hpp"

using namespace morkit;

namespace {

struct Moments {
  double mean = 0.0, var = 0.0;
};

Moments moments(std::span<const double> v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(v.size());
  return m;
}

// Plain per-element inverse of SELU on the negative branch.
double selu_inverse(double y) {
  if (y > 0.0) return y / SeluConstants::lambda;
  return std::log1p(y / (SeluConstants::lambda * SeluConstants::alpha));
}

}  // namespace

TEST(Selu, Constants) {
  EXPECT_EQ(SeluConstants::lambda, 1.0507009873554805);
  EXPECT_EQ(SeluConstants::alpha, 1.6732632423543772);
  EXPECT_EQ(selu(0.0), 0.0);
  EXPECT_DOUBLE_EQ(selu(2.0), 2.0 * 1.0507009873554805);
  EXPECT_NEAR(selu(-20.0), -1.758099337223664, 1e-15);
  EXPECT_NEAR(selu(-1e3), -1.7580993408473766, 1e-15);  // saturates at -lambda*alpha
}

TEST(Selu, SmallNegativeInputsKeepPrecision) {
  EXPECT_NEAR(selu(-1e-12) / -1e-12, SeluConstants::lambda * SeluConstants::alpha, 1e-9);
}

TEST(Conv3x3, OnesGiveNeighborCounts) {
  const Tensor4 x(1, 1, 3, 3, 1.0);
  const Kernel3x3 k(1, 1, std::vector<double>(9, 1.0));
  const Tensor4 y = conv3x3(x, k);
  EXPECT_EQ(y.at(0, 0, 1, 1), 9.0);
  EXPECT_EQ(y.at(0, 0, 0, 0), 4.0);
  EXPECT_EQ(y.at(0, 0, 0, 1), 6.0);
}

TEST(Conv3x3, IdentityKernelAndOrientation) {
  const Tensor4 x = reference::random_normal_tensor(2, 3, 5, 4, 1);
  EXPECT_EQ(conv3x3(x, Kernel3x3::identity(3)).data().size(), x.data().size());
  const Tensor4 y = conv3x3(x, Kernel3x3::identity(3));
  for (std::size_t i = 0; i < x.data().size(); ++i) EXPECT_EQ(y.data()[i], x.data()[i]);

  // Tap (ky=1, kx=2) reads the right-hand neighbor (cross-correlation).
  std::vector<double> w(9, 0.0);
  w[5] = 1.0;
  const Tensor4 ramp(1, 1, 1, 3, std::vector<double>{1.0, 2.0, 3.0});
  const Tensor4 shifted = conv3x3(ramp, Kernel3x3(1, 1, w));
  EXPECT_EQ(shifted.at(0, 0, 0, 0), 2.0);
  EXPECT_EQ(shifted.at(0, 0, 0, 2), 0.0);
}

TEST(Conv3x3, ChannelMismatchRejected) {
  EXPECT_THROW(conv3x3(Tensor4(1, 2, 3, 3, 0.0), Kernel3x3::zeros(4, 3)), DimensionError);
  EXPECT_THROW(Kernel3x3(1, 1, std::vector<double>(8)), DimensionError);
}

TEST(BatchNorm, AffineApplied) {
  const Tensor4 x = reference::random_normal_tensor(3, 2, 4, 4, 2);
  const AffineParams a{{2.0, 0.5}, {1.0, -1.0}};
  const Tensor4 y = batch_norm(x, a);
  for (std::size_t c = 0; c < 2; ++c) {
    std::vector<double> v;
    for (std::size_t n = 0; n < 3; ++n) {
      const auto p = y.plane(n, c);
      v.insert(v.end(), p.begin(), p.end());
    }
    const Moments m = moments(v);
    EXPECT_NEAR(m.mean, a.beta[c], 1e-12);
    EXPECT_NEAR(m.var, a.gamma[c] * a.gamma[c], 1e-3);
  }
  EXPECT_THROW(batch_norm(x, AffineParams::identity(3)), DimensionError);
}

TEST(InstanceNorm, ConstantPlaneMapsToZero) {
  const Tensor4 x(1, 1, 4, 4, 3.0);
  const Tensor4 y = instance_norm(x);
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(Hnb, HalfStatistics) {
  for (std::uint64_t k = 0; k < 50; ++k) {
    const Tensor4 x = reference::random_normal_tensor(4, 8, 16, 16, 1000 + k);
    const HnbOutput r = hnb_normalize(x, AffineParams::identity(4));
    for (std::size_t c = 0; c < 4; ++c) {
      std::vector<double> v;
      for (std::size_t n = 0; n < 4; ++n) {
        const auto p = r.pre_activation.plane(n, c);
        v.insert(v.end(), p.begin(), p.end());
      }
      const Moments m = moments(v);
      EXPECT_LE(std::abs(m.mean), 1e-5);
      EXPECT_LE(std::abs(m.var - 1.0), 1e-4);
    }
    for (std::size_t n = 0; n < 4; ++n) {
      for (std::size_t c = 4; c < 8; ++c) {
        const Moments m = moments(r.pre_activation.plane(n, c));
        EXPECT_LE(std::abs(m.mean), 1e-5);
        EXPECT_LE(std::abs(m.var - 1.0), 1e-4);
      }
    }
  }
}

TEST(Hnb, HalvesUseDifferentStatistics) {
  // A per-sample offset survives batch norm but not instance norm.
  Tensor4 x = reference::random_normal_tensor(2, 2, 4, 4, 7);
  std::vector<double> v(x.data().begin(), x.data().end());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += i < v.size() / 2 ? 5.0 : -5.0;
  x = Tensor4(2, 2, 4, 4, std::move(v));
  const HnbOutput r = hnb_normalize(x, AffineParams::identity(1));
  EXPECT_GT(moments(r.pre_activation.plane(0, 0)).mean, 0.5);
  EXPECT_NEAR(moments(r.pre_activation.plane(0, 1)).mean, 0.0, 1e-12);
}

TEST(Hnb, OutputIsSeluOfPreActivation) {
  const Tensor4 x = reference::random_normal_tensor(2, 4, 6, 6, 3);
  const HnbOutput r = hnb_normalize(x, AffineParams::identity(2));
  for (std::size_t i = 0; i < x.data().size(); ++i) {
    EXPECT_NEAR(selu_inverse(r.out.data()[i]), r.pre_activation.data()[i], 1e-9);
  }
}

TEST(Hnb, OddChannelCountRejected) {
  const Tensor4 x(1, 3, 4, 4, 0.0);
  try {
    hnb_normalize(x, AffineParams::identity(1));
    FAIL();
  } catch (const DimensionError& e) {
    EXPECT_STREQ(e.what(), "channel count must be even for HNB split");
  }
}

TEST(Hnb, BlockShapes) {
  const Tensor4 x = reference::random_normal_tensor(2, 3, 8, 8, 4);
  std::vector<double> w(6 * 3 * 9);
  CounterRng rng(5);
  for (double& v : w) v = rng.normal() * 0.3;
  const Tensor4 y = hnb_block(x, Kernel3x3(6, 3, w), AffineParams::identity(3));
  EXPECT_EQ(y.c(), 6u);
  EXPECT_EQ(y.h(), 8u);
  for (double v : y.data()) EXPECT_GT(v, -SeluConstants::lambda * SeluConstants::alpha);
}

TEST(Channels, SliceConcatRoundTrip) {
  const Tensor4 x = reference::random_normal_tensor(2, 6, 3, 3, 8);
  const Tensor4 y = concat_channels(slice_channels(x, 0, 2), slice_channels(x, 2, 6));
  for (std::size_t i = 0; i < x.data().size(); ++i) EXPECT_EQ(y.data()[i], x.data()[i]);
  EXPECT_THROW(slice_channels(x, 3, 3), DimensionError);
}
