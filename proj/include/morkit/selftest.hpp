#pragma once

// Fixed-seed invariant checks behind the `selftest` subcommand.

#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "morkit/metrics.hpp"
#include "morkit/norm.hpp"
#include "morkit/pipeline.hpp"
#include "morkit/reference.hpp"
#include "morkit/synthesis.hpp"

namespace morkit {

struct SelftestOptions {
  // Test hook: scales the SSIM C1 used by the implementation under test so
  // the oracle comparison has something to catch.
  bool perturb_ssim_c1 = false;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::string sci(double v) {
  std::ostringstream o;
  o.precision(3);
  o << std::scientific << v;
  return o.str();
}

inline CheckResult check_shipped_constants(const SsimParams& p) {
  const LossWeights w;
  const bool ok = w.lambda1 == 0.1 && w.lambda2 == 0.01 && w.lambda3 == 0.01 && w.alpha_rec == 0.1 &&
                  p.c1 == 0.0001 && p.c2 == 0.0009 && p.scales == 5 &&
                  std::all_of(p.beta.begin(), p.beta.end(), [](double e) { return e == 1.0; }) &&
                  std::all_of(p.gamma.begin(), p.gamma.end(), [](double e) { return e == 1.0; });
  return {"default constants", ok, "C1=" + format_double(p.c1) + " C2=" + format_double(p.c2) +
                                       " M=" + std::to_string(p.scales)};
}

inline CheckResult check_ssim_oracle(const SsimParams& p) {
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const Image x = reference::random_image(32, 32, 1, 1000 + k), y = reference::random_image(32, 32, 1, 2000 + k);
    worst = std::max(worst, std::abs(ssim(x, y, p) - reference::ssim(x, y, 0.0001, 0.0009)));
  }
  return {"ssim vs window oracle", worst <= 1e-8, "max|diff|=" + sci(worst)};
}

inline CheckResult check_ssim_identity(const SsimParams& p) {
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const Image x = reference::random_image(24, 24, 3, 3000 + k);
    worst = std::max(worst, std::abs(ssim(x, x, p) - 1.0));
  }
  const Image big = reference::textured_image(352, 352, 3, 77);
  worst = std::max(worst, std::abs(ms_ssim(big, big, p) - 1.0));
  return {"ssim/ms_ssim identity", worst <= 1e-9, "max|1-s|=" + sci(worst)};
}

inline CheckResult check_dark_channel_oracle() {
  bool ok = true;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const Image img = reference::random_image(16, 16, 3, 4000 + k);
    const auto impl = dark_channel(img, 5);
    const auto ref = reference::dark_channel(img, 5);
    ok = ok && std::equal(ref.begin(), ref.end(), impl.data().begin());
    ok = ok && dc_loss(img, 5) == reference::dark_channel_mean(img, 5);
  }
  return {"dark channel vs brute force", ok, "exact"};
}

inline CheckResult check_tv_oracle() {
  bool ok = true;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const Image img = reference::random_image(16, 16, 3, 5000 + k);
    ok = ok && tv_loss(img) == reference::tv(img) &&
         tv_loss(img, TvVariant::Anisotropic) == reference::tv(img, true);
  }
  return {"tv loss vs brute force", ok, "exact"};
}

inline CheckResult check_loss_arithmetic() {
  const double total = total_loss(1, 1, 1, 1, 1);
  const double g = lsgan_g_loss({0.0, 2.0});
  const double d = lsgan_d_loss({0.0}, {1.0});
  const double rec = rec_loss_from_components(0.5, 0.2);
  const bool ok = std::abs(total - 2.12) <= 1e-12 && std::abs(g - 1.0) <= 1e-12 && std::abs(d - 2.0) <= 1e-12 &&
                  std::abs(rec - 0.23) <= 1e-12;
  return {"loss arithmetic", ok, "total=" + format_double(total) + " rec=" + format_double(rec)};
}

inline CheckResult check_hnb_statistics() {
  double worst_mean = 0.0, worst_var = 0.0;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const Tensor4 x = reference::random_normal_tensor(4, 8, 16, 16, 6000 + k);
    const auto r = hnb_normalize(x, AffineParams::identity(4));
    const Tensor4& p = r.pre_activation;
    for (std::size_t c = 0; c < 4; ++c) {
      double s = 0.0, sq = 0.0;
      for (std::size_t n = 0; n < 4; ++n) {
        for (double v : p.plane(n, c)) s += v;
      }
      const double mean = s / (4.0 * 256.0);
      for (std::size_t n = 0; n < 4; ++n) {
        for (double v : p.plane(n, c)) sq += (v - mean) * (v - mean);
      }
      worst_mean = std::max(worst_mean, std::abs(mean));
      worst_var = std::max(worst_var, std::abs(sq / (4.0 * 256.0) - 1.0));
    }
    for (std::size_t n = 0; n < 4; ++n) {
      for (std::size_t c = 4; c < 8; ++c) {
        double s = 0.0, sq = 0.0;
        for (double v : p.plane(n, c)) s += v;
        const double mean = s / 256.0;
        for (double v : p.plane(n, c)) sq += (v - mean) * (v - mean);
        worst_mean = std::max(worst_mean, std::abs(mean));
        worst_var = std::max(worst_var, std::abs(sq / 256.0 - 1.0));
      }
    }
  }
  bool odd_rejected = false;
  try {
    hnb_normalize(Tensor4(1, 3, 2, 2, 0.5), AffineParams::identity(1));
  } catch (const DimensionError&) {
    odd_rejected = true;
  }
  return {"hnb normalization statistics", worst_mean <= 1e-5 && worst_var <= 1e-4 && odd_rejected,
          "max|mean|=" + sci(worst_mean) + " max|var-1|=" + sci(worst_var)};
}

inline CheckResult check_norm_contracts() {
  const Tensor4 x = reference::random_normal_tensor(3, 2, 5, 5, 7000);
  // Rescale and shift instance 1 only.
  std::vector<double> mod(x.data().begin(), x.data().end());
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < 25; ++i) mod[x.index(1, c, 0, 0) + i] = 3.0 * mod[x.index(1, c, 0, 0) + i] + 2.0;
  }
  const Tensor4 y(3, 2, 5, 5, mod);
  const Tensor4 in_x = instance_norm(x, 0.0), in_y = instance_norm(y, 0.0);
  double shift_err = 0.0;
  bool others_same = true;
  for (std::size_t n = 0; n < 3; ++n) {
    for (std::size_t c = 0; c < 2; ++c) {
      for (std::size_t i = 0; i < 25; ++i) {
        const double a = in_x.plane(n, c)[i], b = in_y.plane(n, c)[i];
        if (n == 1) shift_err = std::max(shift_err, std::abs(a - b));
        else others_same = others_same && a == b;
      }
    }
  }
  const Tensor4 bn_x = batch_norm(x, AffineParams::identity(2)), bn_y = batch_norm(y, AffineParams::identity(2));
  const bool bn_depends = bn_x.plane(0, 0)[0] != bn_y.plane(0, 0)[0];
  const double eps = 1e-300;
  const bool selu_cont = std::abs(selu(eps) - selu(-eps)) <= 1e-15 && selu(0.0) == 0.0;
  return {"normalization contracts", shift_err <= 1e-6 && others_same && bn_depends && selu_cont,
          "in shift/scale err=" + sci(shift_err)};
}

inline CheckResult check_physics_identities() {
  const std::size_t w = 64, h = 48;
  const Image clean = reference::random_image(w, h, 3, 8000);
  std::vector<double> ramp(w * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) ramp[y * w + x] = static_cast<double>(x) * 3.0;
  }
  const DepthMap depth(w, h, ramp);
  RainRecipe r;
  r.streak.density = 0.0;
  r.drops.count_density = 0.0;
  r.haze.beta = 0.0;
  r.streak.alpha = 0.0;
  const MorSample s = synth_sample(clean, depth, r);
  bool ok = s.mor == clean;
  for (double v : s.t.data()) ok = ok && v == 1.0;
  for (double v : s.t_r.data()) ok = ok && v == 1.0;
  std::vector<double> tiny(w * h, std::numeric_limits<double>::min());
  const Image haze = compose_haze(clean, TransmissionMap(w, h, tiny), {0.2, 0.4, 0.6});
  double worst = 0.0;
  for (std::size_t i = 0; i < w * h; ++i) {
    for (std::size_t c = 0; c < 3; ++c) worst = std::max(worst, std::abs(haze.data()[i * 3 + c] - 0.2 * (c + 1)));
  }
  RainRecipe rainy;
  rainy.seed = 99;
  const MorSample a = synth_sample(clean, depth, rainy), b = synth_sample(clean, depth, rainy);
  ok = ok && worst <= 1e-12 && a.mor == b.mor && recompose(a) == a.mor;
  return {"physics identities and determinism", ok, "haze limit err=" + sci(worst)};
}

inline CheckResult check_monotonicity() {
  const std::size_t w = 64, h = 8;
  std::vector<double> ramp(w * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) ramp[y * w + x] = static_cast<double>(x);
  }
  const DepthMap depth(w, h, ramp);
  const Image clean(w, h, 3, 0.5);
  CounterRng rng(9000);
  std::size_t violations = 0;
  for (int k = 0; k < 20; ++k) {
    RainRecipe r;
    r.streak.alpha = rng.uniform(0.001, 0.2);
    r.haze.beta = rng.uniform(0.001, 0.2);
    r.seed = k;
    const auto bins = stratify_by_depth(synth_sample(clean, depth, r), 8);
    for (std::size_t b = 1; b < bins.size(); ++b) {
      if (!(bins[b].mean_t < bins[b - 1].mean_t)) ++violations;
      if (!(bins[b].mean_t_r < bins[b - 1].mean_t_r)) ++violations;
    }
  }
  return {"depth monotonicity", violations == 0, "violations=" + std::to_string(violations)};
}

}  // namespace detail

inline std::vector<CheckResult> run_selftest(const SelftestOptions& opt = {}) {
  SsimParams p;
  if (opt.perturb_ssim_c1) p.c1 *= 10.0;
  return {detail::check_shipped_constants(p), detail::check_ssim_oracle(p),   detail::check_ssim_identity(p),
          detail::check_dark_channel_oracle(), detail::check_tv_oracle(),   detail::check_loss_arithmetic(),
          detail::check_hnb_statistics(),      detail::check_norm_contracts(), detail::check_physics_identities(),
          detail::check_monotonicity()};
}

/// Fixed-width table: status, check name, detail.
inline std::string format_selftest(const std::vector<CheckResult>& results) {
  std::ostringstream o;
  std::size_t failed = 0;
  for (const auto& r : results) {
    o << (r.passed ? "PASS" : "FAIL") << "  ";
    o << r.name << std::string(r.name.size() < 36 ? 36 - r.name.size() : 1, ' ') << r.detail << '\n';
    failed += r.passed ? 0 : 1;
  }
  o << results.size() - failed << "/" << results.size() << " checks passed\n";
  return o.str();
}

}  // namespace morkit
