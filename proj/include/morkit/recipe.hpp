#pragma once

// RainRecipe serialization: the sectioned text format used by .recipe files
// and the JSON object embedded in manifest records. Key names follow the
// field names; numbers are written in shortest round-trip form, so both
// encodings are lossless.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "morkit/keyvalue.hpp"
#include "morkit/synthesis.hpp"

namespace morkit {

namespace detail {

inline std::string format_range(const Range& r) { return format_double(r.min) + ", " + format_double(r.max); }

inline std::string format_rgb(const Rgb& c) {
  return format_double(c[0]) + ", " + format_double(c[1]) + ", " + format_double(c[2]);
}

inline void read_range(KeyValueReader& r, const std::string& section, const std::string& key, Range& out) {
  const auto v = r.read_list(section, key, 2);
  if (!v.empty()) out = {v[0], v[1]};
}

inline void read_rgb(KeyValueReader& r, const std::string& section, const std::string& key, Rgb& out) {
  const auto v = r.read_list(section, key, 3);
  if (!v.empty()) out = {v[0], v[1], v[2]};
}

}  // namespace detail

inline std::string recipe_to_text(const RainRecipe& r) {
  using detail::format_range;
  std::ostringstream o;
  o << "[recipe]\n"
    << "seed = " << r.seed << "\n\n"
    << "[streak]\n"
    << "alpha = " << format_double(r.streak.alpha) << "\n"
    << "density = " << format_double(r.streak.density) << "\n"
    << "angle_mean = " << format_double(r.streak.angle_mean) << "\n"
    << "angle_jitter = " << format_double(r.streak.angle_jitter) << "\n"
    << "length_range = " << format_range(r.streak.length) << "\n"
    << "width_range = " << format_range(r.streak.width) << "\n"
    << "intensity_range = " << format_range(r.streak.intensity) << "\n\n"
    << "[drops]\n"
    << "count_density = " << format_double(r.drops.count_density) << "\n"
    << "radius_log_mean = " << format_double(r.drops.radius_log_mean) << "\n"
    << "radius_log_sigma = " << format_double(r.drops.radius_log_sigma) << "\n"
    << "thickness_max = " << format_double(r.drops.thickness_max) << "\n"
    << "mask_threshold = " << format_double(r.drops.mask_threshold) << "\n\n"
    << "[haze]\n"
    << "beta = " << format_double(r.haze.beta) << "\n"
    << "atmosphere = " << detail::format_rgb(r.haze.atmosphere) << "\n"
    << "ambient = " << detail::format_rgb(r.haze.ambient) << "\n\n"
    << "[jitter]\n"
    << "alpha = " << format_double(r.jitter.alpha) << "\n"
    << "beta = " << format_double(r.jitter.beta) << "\n"
    << "streak_density = " << format_double(r.jitter.streak_density) << "\n"
    << "drop_density = " << format_double(r.jitter.drop_density) << "\n"
    << "angle_mean = " << format_double(r.jitter.angle_mean) << "\n";
  return o.str();
}

/// Fields absent from the file keep their defaults; unknown keys are rejected.
inline RainRecipe recipe_from_config(const KeyValueFile& file) {
  RainRecipe r;
  KeyValueReader kv(file);
  kv.read("recipe", "seed", r.seed);
  kv.read("streak", "alpha", r.streak.alpha);
  kv.read("streak", "density", r.streak.density);
  kv.read("streak", "angle_mean", r.streak.angle_mean);
  kv.read("streak", "angle_jitter", r.streak.angle_jitter);
  detail::read_range(kv, "streak", "length_range", r.streak.length);
  detail::read_range(kv, "streak", "width_range", r.streak.width);
  detail::read_range(kv, "streak", "intensity_range", r.streak.intensity);
  kv.read("drops", "count_density", r.drops.count_density);
  kv.read("drops", "radius_log_mean", r.drops.radius_log_mean);
  kv.read("drops", "radius_log_sigma", r.drops.radius_log_sigma);
  kv.read("drops", "thickness_max", r.drops.thickness_max);
  kv.read("drops", "mask_threshold", r.drops.mask_threshold);
  kv.read("haze", "beta", r.haze.beta);
  detail::read_rgb(kv, "haze", "atmosphere", r.haze.atmosphere);
  detail::read_rgb(kv, "haze", "ambient", r.haze.ambient);
  kv.read("jitter", "alpha", r.jitter.alpha);
  kv.read("jitter", "beta", r.jitter.beta);
  kv.read("jitter", "streak_density", r.jitter.streak_density);
  kv.read("jitter", "drop_density", r.jitter.drop_density);
  kv.read("jitter", "angle_mean", r.jitter.angle_mean);
  kv.reject_unknown();
  r.validate();
  return r;
}

inline RainRecipe recipe_from_text(std::string_view text, const std::string& origin = "<recipe>") {
  return recipe_from_config(KeyValueFile::parse(text, origin));
}

inline RainRecipe load_recipe(const std::filesystem::path& path) { return recipe_from_config(KeyValueFile::load(path)); }

inline void save_recipe(const RainRecipe& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open recipe for writing");
  out << recipe_to_text(r);
}

inline nlohmann::ordered_json recipe_to_json(const RainRecipe& r) {
  auto range = [](const Range& x) { return nlohmann::ordered_json::array({x.min, x.max}); };
  auto rgb = [](const Rgb& c) { return nlohmann::ordered_json::array({c[0], c[1], c[2]}); };
  nlohmann::ordered_json j;
  j["seed"] = r.seed;
  j["streak"] = {{"alpha", r.streak.alpha},
                 {"density", r.streak.density},
                 {"angle_mean", r.streak.angle_mean},
                 {"angle_jitter", r.streak.angle_jitter},
                 {"length_range", range(r.streak.length)},
                 {"width_range", range(r.streak.width)},
                 {"intensity_range", range(r.streak.intensity)}};
  j["drops"] = {{"count_density", r.drops.count_density},
                {"radius_log_mean", r.drops.radius_log_mean},
                {"radius_log_sigma", r.drops.radius_log_sigma},
                {"thickness_max", r.drops.thickness_max},
                {"mask_threshold", r.drops.mask_threshold}};
  j["haze"] = {{"beta", r.haze.beta}, {"atmosphere", rgb(r.haze.atmosphere)}, {"ambient", rgb(r.haze.ambient)}};
  j["jitter"] = {{"alpha", r.jitter.alpha},
                 {"beta", r.jitter.beta},
                 {"streak_density", r.jitter.streak_density},
                 {"drop_density", r.jitter.drop_density},
                 {"angle_mean", r.jitter.angle_mean}};
  return j;
}

/// Inverse of recipe_to_json. Goes through the text reader so the same
/// unknown-key and validation rules apply.
inline RainRecipe recipe_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw Error("recipe JSON must be an object");
  std::ostringstream text;
  auto number = [](const nlohmann::ordered_json& v, const std::string& where) -> std::string {
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number()) return format_double(v.get<double>());
    if (v.is_array()) {
      std::string s;
      for (const auto& e : v) {
        if (!e.is_number()) throw Error(where + ": array entries must be numbers");
        s += (s.empty() ? "" : ", ") + format_double(e.get<double>());
      }
      return s;
    }
    throw Error(where + ": expected a number or array of numbers");
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") {
      if (!value.is_number_unsigned()) throw Error("recipe.seed must be an unsigned integer");
      text << "[recipe]\nseed = " << value.get<std::uint64_t>() << "\n";
      continue;
    }
    if (!value.is_object()) throw Error("recipe." + key + " must be an object");
    text << "[" << key << "]\n";
    for (const auto& [k, v] : value.items()) text << k << " = " << number(v, key + "." + k) << "\n";
  }
  return recipe_from_text(text.str(), "<recipe json>");
}

}  // namespace morkit
