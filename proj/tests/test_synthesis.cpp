#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "morkit/pipeline.hpp"
#include "morkit/reference.hpp"
#include "morkit/synthesis.hpp"
#include "test_util.hpp"

using namespace morkit;
using morkit::testing::ramp_depth;

namespace {

double fraction_nonzero(std::span<const double> v) {
  std::size_t n = 0;
  for (double x : v) n += x > 0.0;
  return static_cast<double>(n) / static_cast<double>(v.size());
}

TransmissionMap constant_t(std::size_t w, std::size_t h, double v) {
  return TransmissionMap(w, h, std::vector<double>(w * h, v));
}

}  // namespace

TEST(Streaks, SingleVerticalSegmentGeometry) {
  const Streak s{10.0, 10.0, 0.0, 10.0, 1.0, 0.8};
  const Image img = rasterize_streaks(21, 21, std::span(&s, 1));
  EXPECT_DOUBLE_EQ(img.at(10, 10), 0.8);
  EXPECT_DOUBLE_EQ(img.at(10, 5), 0.8);
  EXPECT_DOUBLE_EQ(img.at(10, 15), 0.8);
  EXPECT_EQ(img.at(11, 10), 0.0);
  EXPECT_EQ(img.at(10, 16), 0.0);
}

TEST(Streaks, PartialCoverageAndSaturation) {
  const Streak s{5.0, 5.0, 0.0, 4.0, 2.0, 0.5};  // reach 1.5: neighbor at distance 1 gets half coverage
  const Image img = rasterize_streaks(11, 11, std::span(&s, 1));
  EXPECT_DOUBLE_EQ(img.at(6, 5), 0.25);
  const std::vector<Streak> stacked(3, Streak{5.0, 5.0, 0.0, 4.0, 1.0, 0.5});
  EXPECT_EQ(rasterize_streaks(11, 11, stacked).at(5, 5), 1.0);
}

TEST(Streaks, ZeroDensityIsBlank) {
  StreakParams p;
  p.density = 0.0;
  const Image img = render_streak_pattern(64, 48, p, 7);
  for (double v : img.data()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(render_streak_pattern(0, 10, StreakParams{}, 1), DimensionError);
}

TEST(Streaks, DeterministicPerSeed) {
  const StreakParams p;
  EXPECT_EQ(render_streak_pattern(160, 120, p, 42), render_streak_pattern(160, 120, p, 42));
  EXPECT_NE(render_streak_pattern(160, 120, p, 42), render_streak_pattern(160, 120, p, 43));
}

TEST(Streaks, AngleJitterRespected) {
  StreakParams p;
  p.angle_jitter = 0.0;
  for (const Streak& s : sample_streaks(720, 480, p, 9)) {
    EXPECT_EQ(s.angle_deg, p.angle_mean);
    EXPECT_GE(s.length, p.length.min);
    EXPECT_LT(s.length, p.length.max);
    EXPECT_GE(s.cx, -0.5);
    EXPECT_LT(s.cx, 719.5);
  }
}

// Expected covered fraction for a Poisson-like scatter of n capsules:
// 1 - exp(-n E[area] / A), with E[area] estimated by an independent sampler.
TEST(Streaks, MonteCarloCoverageMatchesCapsuleOracle) {
  const std::size_t w = 720, h = 480;
  const StreakParams p;  // density 200 per megapixel
  const double n = std::ceil(p.density * static_cast<double>(w * h) / 1e6);

  std::mt19937_64 gen(12345);
  std::uniform_real_distribution<double> len(p.length.min, p.length.max), wid(p.width.min, p.width.max);
  double area = 0.0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) {
    const double r = wid(gen) / 2.0 + 0.5;
    area += len(gen) * 2.0 * r + std::numbers::pi * r * r;
  }
  area /= draws;
  const double expected = 1.0 - std::exp(-n * area / static_cast<double>(w * h));

  double observed = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) observed += fraction_nonzero(render_streak_pattern(w, h, p, seed).data());
  observed /= 100.0;
  EXPECT_NEAR(observed, expected, 0.3 * expected) << "expected " << expected;
}

TEST(Drops, ProfileShape) {
  EXPECT_DOUBLE_EQ(drop_profile(0.0, 10.0, 0.85), 0.85);
  EXPECT_NEAR(drop_profile(10.0, 10.0, 0.85), 0.0, 1e-15);
  EXPECT_EQ(drop_profile(10.01, 10.0, 0.85), 0.0);
  EXPECT_NEAR(drop_profile(5.0, 10.0, 1.0), 0.5, 1e-15);
}

TEST(Drops, MaskIsThresholdedLayer) {
  const DropParams p;
  const DropField f = render_raindrops(200, 150, p, 3);
  for (std::size_t i = 0; i < f.mask().size(); ++i) {
    EXPECT_EQ(f.mask()[i], f.layer()[i] > p.mask_threshold ? 1 : 0);
  }
}

TEST(Drops, OverlapTakesMaximum) {
  DropParams p;
  const std::vector<Drop> drops{{10.0, 10.0, 5.0}, {12.0, 10.0, 5.0}};
  const DropField f = rasterize_drops(30, 20, drops, p);
  const double d0 = drop_profile(1.0, 5.0, p.thickness_max);
  EXPECT_DOUBLE_EQ(f.layer()[10 * 30 + 11], d0);
}

TEST(Drops, PixelCountMatchesDiscOracle) {
  const std::size_t w = 720, h = 480;
  const DropParams p;
  const double n = std::ceil(p.count_density * static_cast<double>(w * h) / 1e6);
  // Masked radius is a fixed fraction of R; E[R^2] of a lognormal is exp(2 mu + 2 sigma^2).
  const double frac = 2.0 / std::numbers::pi * std::acos(std::sqrt(p.mask_threshold / p.thickness_max));
  const double er2 = std::exp(2.0 * p.radius_log_mean + 2.0 * p.radius_log_sigma * p.radius_log_sigma);
  const double expected = 1.0 - std::exp(-n * std::numbers::pi * frac * frac * er2 / static_cast<double>(w * h));

  double observed = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const DropField f = render_raindrops(w, h, p, seed);
    std::size_t c = 0;
    for (auto m : f.mask()) c += m;
    observed += static_cast<double>(c) / static_cast<double>(w * h);
  }
  observed /= 100.0;
  EXPECT_NEAR(observed, expected, 0.3 * expected) << "expected " << expected;
}

TEST(Transmission, ExactValues) {
  const DepthMap d(2, 1, {0.0, 230.2585});
  const auto t = haze_transmission(d, 0.01);
  EXPECT_EQ(t.data()[0], 1.0);
  EXPECT_EQ(t.data()[1], 0.10000000929940499);
  EXPECT_EQ(streak_transmission(DepthMap(1, 1, {1.0}), 1.0).data()[0], 0.36787944117144233);
  EXPECT_THROW(haze_transmission(d, -0.1), Error);
  EXPECT_THROW(streak_transmission(d, NAN), Error);
}

TEST(Transmission, FlooredForHugeDepth) {
  const auto t = haze_transmission(DepthMap(1, 1, {1e6}), 10.0);
  EXPECT_GT(t.data()[0], 0.0);
}

TEST(Compose, WorkedExamples) {
  const Image bg(1, 1, 3, 0.5);
  const Image s(1, 1, 1, 0.6);
  EXPECT_DOUBLE_EQ(compose_rain_streaks(bg, s, constant_t(1, 1, 0.5)).at(0, 0, 1), 0.8);
  EXPECT_DOUBLE_EQ(compose_haze(bg, constant_t(1, 1, 0.5), {1.0, 1.0, 1.0}).at(0, 0, 2), 0.75);
  const DropField one(1, 1, {1}, {0.3});
  EXPECT_DOUBLE_EQ(compose_raindrops(bg, one).at(0, 0, 0), 0.3);
}

TEST(Compose, StreaksSaturateAtOne) {
  const Image bg(2, 2, 3, 0.9);
  const Image s(2, 2, 1, 1.0);
  const Image out = compose_rain_streaks(bg, s, constant_t(2, 2, 1.0));
  for (double v : out.data()) EXPECT_EQ(v, 1.0);
}

TEST(Compose, HazeLimits) {
  const Image bg = reference::random_image(8, 8, 3, 1);
  const Rgb a{0.2, 0.4, 0.9};
  EXPECT_EQ(compose_haze(bg, constant_t(8, 8, 1.0), a), bg);
  // t -> 0 via the floor: every pixel takes the atmosphere light.
  const auto t0 = haze_transmission(DepthMap(8, 8, std::vector<double>(64, 1e9)), 1.0);
  const Image out = compose_haze(bg, t0, a);
  for (std::size_t y = 0; y < 8; ++y) {
    for (std::size_t x = 0; x < 8; ++x) {
      for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(out.at(x, y, c), a[c]);
    }
  }
  EXPECT_THROW(compose_haze(bg, constant_t(8, 8, 1.0), {1.5, 0.0, 0.0}), Error);
}

TEST(Compose, GrayUsesAmbientLuma) {
  const Image bg(1, 1, 1, 0.0);
  const Image out = compose_haze(bg, constant_t(1, 1, 0.5), {1.0, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(out.at(0, 0), 0.5 * 0.299);
}

TEST(Compose, ShapeMismatchRejected) {
  const Image bg(4, 4, 3, 0.5);
  EXPECT_THROW(compose_rain_streaks(bg, Image(4, 3, 1, 0.0), constant_t(4, 4, 1.0)), DimensionError);
  EXPECT_THROW(compose_rain_streaks(bg, Image(4, 4, 3, 0.0), constant_t(4, 4, 1.0)), DimensionError);
  EXPECT_THROW(compose_raindrops(bg, DropField::empty(5, 4)), DimensionError);
}

// With the other terms neutral, the full model collapses to each single-effect model.
TEST(Compose, MorReducesToEachComponent) {
  const std::size_t w = 40, h = 30;
  const Rgb white{1.0, 1.0, 1.0};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Image bg = reference::random_image(w, h, 3, seed);
    const Image s = render_streak_pattern(w, h, StreakParams{}, seed);
    const DepthMap d = ramp_depth(w, h, 3.0);
    const auto tr = streak_transmission(d, 0.02);
    const auto t = haze_transmission(d, 0.05);
    const DropField drops = render_raindrops(w, h, DropParams{}, seed);
    const DropField none = DropField::empty(w, h);
    const Image zero(w, h, 1, 0.0);
    const auto ones = constant_t(w, h, 1.0);

    const auto a = compose_mor(bg, s, tr, none, ones, white);
    const auto b = compose_rain_streaks(bg, s, tr);
    for (std::size_t i = 0; i < a.sample_count(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], 1e-12);

    const auto c = compose_mor(bg, zero, tr, drops, ones, white);
    const auto e = compose_raindrops(bg, drops);
    for (std::size_t i = 0; i < c.sample_count(); ++i) EXPECT_NEAR(c.data()[i], e.data()[i], 1e-12);

    const Rgb amb{0.7, 0.75, 0.8};
    const auto f = compose_mor(bg, zero, tr, none, t, amb);
    const auto g = compose_haze(bg, t, amb);
    for (std::size_t i = 0; i < f.sample_count(); ++i) EXPECT_NEAR(f.data()[i], g.data()[i], 1e-12);
  }
}

TEST(Compose, DegenerateRecipeIsIdentity) {
  RainRecipe r;
  r.streak.density = 0.0;
  r.drops.count_density = 0.0;
  r.haze.beta = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    r.seed = seed;
    const Image clean = reference::random_image(64, 48, 3, seed);
    const MorSample s = synth_sample(clean, ramp_depth(64, 48, 5.0), r);
    EXPECT_EQ(s.mor, clean);
  }
  r.streak.alpha = 0.0;
  const MorSample s = synth_sample(Image(8, 8, 3, 0.5), ramp_depth(8, 8, 5.0), r);
  for (double v : s.t.data()) EXPECT_EQ(v, 1.0);
  for (double v : s.t_r.data()) EXPECT_EQ(v, 1.0);
}

TEST(Compose, HazeDarkensTowardAmbientWithDepth) {
  RainRecipe r;
  r.streak.density = 0.0;
  r.drops.count_density = 0.0;
  r.haze.beta = 0.05;
  r.haze.ambient = {1.0, 1.0, 1.0};
  const MorSample s = synth_sample(Image(50, 1, 1, 0.0), ramp_depth(50, 1, 1.0), r);
  for (std::size_t x = 1; x < 50; ++x) EXPECT_GT(s.mor.at(x, 0), s.mor.at(x - 1, 0));
}

TEST(Recipe, ValidationRejectsBadRanges) {
  RainRecipe r;
  r.streak.length = {60.0, 30.0};
  EXPECT_THROW(r.validate(), Error);
  r = RainRecipe{};
  r.drops.thickness_max = 1.5;
  EXPECT_THROW(r.validate(), Error);
  r = RainRecipe{};
  r.haze.ambient = {0.5, 1.2, 0.5};
  EXPECT_THROW(r.validate(), Error);
  r = RainRecipe{};
  r.streak.density = -1.0;
  EXPECT_THROW(r.validate(), Error);
}
