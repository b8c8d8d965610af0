// Renders one mixture-of-rain sample from a procedural street-like scene and
// writes the clean image, the rainy image and the haze transmission.
//
//   morkit_demo <out_dir> [seed]

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "morkit/morkit.hpp"

namespace {

// Depth grows toward the horizon row; a sky band above it is far away.
morkit::DepthMap horizon_depth(std::size_t w, std::size_t h) {
  std::vector<double> d(w * h);
  const double horizon = 0.4 * static_cast<double>(h);
  for (std::size_t y = 0; y < h; ++y) {
    const double dy = static_cast<double>(y) - horizon;
    const double depth = dy <= 1.0 ? 250.0 : std::min(250.0, 12.0 * static_cast<double>(h) / dy);
    for (std::size_t x = 0; x < w; ++x) d[y * w + x] = depth;
  }
  return morkit::DepthMap(w, h, std::move(d));
}

morkit::Image scene(std::size_t w, std::size_t h) {
  std::vector<double> v(w * h * 3);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double fy = static_cast<double>(y) / static_cast<double>(h);
      const double fx = static_cast<double>(x) / static_cast<double>(w);
      const bool sky = fy < 0.4;
      const double stripe = ((x / 24 + y / 24) % 2 == 0) ? 0.08 : 0.0;
      v[(y * w + x) * 3 + 0] = sky ? 0.55 + 0.2 * fy : 0.25 + 0.3 * fx + stripe;
      v[(y * w + x) * 3 + 1] = sky ? 0.65 + 0.2 * fy : 0.30 + 0.2 * fy + stripe;
      v[(y * w + x) * 3 + 2] = sky ? 0.85 : 0.28 + stripe;
    }
  }
  return morkit::Image(w, h, 3, std::move(v));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: morkit_demo <out_dir> [seed]\n";
    return 2;
  }
  const std::filesystem::path out = argv[1];
  std::filesystem::create_directories(out);
  morkit::RainRecipe recipe;
  recipe.seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 7;

  const std::size_t w = 720, h = 480;
  const auto s = morkit::synth_sample(scene(w, h), horizon_depth(w, h), recipe);
  morkit::save_image(s.clean, out / "clean.png");
  morkit::save_image(s.mor, out / "mor.png");
  morkit::save_image(morkit::Image(w, h, 1, std::vector<double>(s.t.data().begin(), s.t.data().end())),
                     out / "t.png", 16);
  std::cout << "psnr(mor, clean) = " << morkit::psnr(s.mor, s.clean) << " dB\n";
  return 0;
}
