#pragma once

// Deterministic batch synthesis and batch evaluation.
//
// Inputs pair up by filename stem. Every sample draws its randomness from
// derive_seed(global_seed, stem), so outputs do not depend on processing
// order or worker count. The manifest is written after all workers finish,
// in stem order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "morkit/error.hpp"
#include "morkit/io.hpp"
#include "morkit/keyvalue.hpp"
#include "morkit/metrics.hpp"
#include "morkit/parallel.hpp"
#include "morkit/raster.hpp"
#include "morkit/recipe.hpp"
#include "morkit/rng.hpp"
#include "morkit/synthesis.hpp"
#include "morkit/version.hpp"

namespace morkit {

namespace fs = std::filesystem;

/// FNV-1a (64-bit) over the 8 little-endian bytes of global_seed followed by
/// the UTF-8 bytes of sample_id.
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view sample_id) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((global_seed >> (8 * i)) & 0xFFu);
  return fnv1a64(sample_id, fnv1a64(std::string_view(bytes, 8)));
}

/// Applies the template's jitter with a stream keyed by `sample_seed` and
/// returns a concrete recipe (jitter zeroed, seed = sample_seed).
inline RainRecipe resolve_recipe(const RainRecipe& tmpl, std::uint64_t sample_seed) {
  constexpr std::uint64_t kJitterDomain = 0x4A4954544552ull;  // "JITTER"
  RainRecipe r = tmpl;
  r.seed = sample_seed;
  r.jitter = {};
  if (tmpl.jitter.any()) {
    CounterRng rng = CounterRng(sample_seed).split(kJitterDomain);
    auto perturb = [&rng](double value, double half_width) { return value + rng.uniform(-half_width, half_width); };
    r.streak.alpha = std::max(0.0, perturb(tmpl.streak.alpha, tmpl.jitter.alpha));
    r.haze.beta = std::max(0.0, perturb(tmpl.haze.beta, tmpl.jitter.beta));
    r.streak.density = std::max(0.0, perturb(tmpl.streak.density, tmpl.jitter.streak_density));
    r.drops.count_density = std::max(0.0, perturb(tmpl.drops.count_density, tmpl.jitter.drop_density));
    r.streak.angle_mean = perturb(tmpl.streak.angle_mean, tmpl.jitter.angle_mean);
  }
  r.validate();
  return r;
}

/// Synthesized image plus every layer needed to recompose it.
struct MorSample {
  Image mor;
  Image clean;
  DepthMap depth;
  Image s_pattern;
  TransmissionMap t_r;
  TransmissionMap t;
  DropField drops;
  RainRecipe recipe;
};

inline Image recompose(const MorSample& s) {
  return compose_mor(s.clean, s.s_pattern, s.t_r, s.drops, s.t, s.recipe.haze.ambient);
}

/// Renders streaks and drops from recipe.seed, computes both transmissions
/// from `depth` and composes the mixture-of-rain image.
inline MorSample synth_sample(const Image& clean, const DepthMap& depth, const RainRecipe& recipe) {
  recipe.validate();
  require_same_size(clean.size(), depth.size(), "synth_sample");
  const std::size_t w = clean.width(), h = clean.height();
  MorSample s;
  s.clean = clean;
  s.depth = depth;
  s.recipe = recipe;
  s.s_pattern = render_streak_pattern(w, h, recipe.streak, recipe.seed);
  s.t_r = streak_transmission(depth, recipe.streak.alpha);
  s.drops = render_raindrops(w, h, recipe.drops, recipe.seed);
  s.t = haze_transmission(depth, recipe.haze.beta);
  s.mor = recompose(s);
  return s;
}

// ---------------------------------------------------------------------------
// Stem pairing

struct StemPairs {
  std::vector<std::pair<fs::path, fs::path>> pairs;  // stem-sorted
  std::vector<std::string> unpaired;                 // "dir/file" entries without a partner
};

namespace detail {

inline std::map<std::string, fs::path> index_by_stem(const fs::path& dir, std::initializer_list<const char*> extensions) {
  if (!fs::is_directory(dir)) throw IoError(dir.string() + ": not a directory");
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (std::find(extensions.begin(), extensions.end(), ext) == extensions.end()) continue;
    const auto stem = entry.path().stem().string();
    if (!out.emplace(stem, entry.path()).second) {
      throw Error(dir.string() + ": more than one file with stem '" + stem + "'");
    }
  }
  return out;
}

inline StemPairs pair_by_stem(const std::map<std::string, fs::path>& a, const std::map<std::string, fs::path>& b) {
  StemPairs p;
  for (const auto& [stem, path] : a) {
    if (auto it = b.find(stem); it != b.end()) {
      p.pairs.emplace_back(path, it->second);
    } else {
      p.unpaired.push_back(path.generic_string());
    }
  }
  for (const auto& [stem, path] : b) {
    if (!a.contains(stem)) p.unpaired.push_back(path.generic_string());
  }
  std::sort(p.unpaired.begin(), p.unpaired.end());
  return p;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Batch synthesis

struct GtBundlePaths {
  std::string s_pattern, t_r, t, drop_layer, drop_mask;
  std::vector<std::string> pfm;  // optional float copies
};

struct ManifestRecord {
  std::string sample_id;
  std::string clean_path;
  std::string depth_path;
  std::string mor_path;  // relative to the output directory
  GtBundlePaths gt_bundle_paths;
  RainRecipe recipe;
  std::string toolkit_version = kToolkitVersion;
};

struct Manifest {
  std::vector<ManifestRecord> records;
  std::vector<std::string> unpaired;
  fs::path path;
};

struct SynthOptions {
  std::size_t threads = 0;
  double depth_scale = 1.0;  // for 16-bit PNG depth maps
  bool write_pfm = false;
  int mor_bits = 8;
};

inline constexpr int kGtLayerBits = 16;

inline nlohmann::ordered_json to_json(const ManifestRecord& r) {
  nlohmann::ordered_json gt = {{"s_pattern", r.gt_bundle_paths.s_pattern},
                               {"t_r", r.gt_bundle_paths.t_r},
                               {"t", r.gt_bundle_paths.t},
                               {"drop_layer", r.gt_bundle_paths.drop_layer},
                               {"drop_mask", r.gt_bundle_paths.drop_mask}};
  if (!r.gt_bundle_paths.pfm.empty()) gt["pfm"] = r.gt_bundle_paths.pfm;
  nlohmann::ordered_json j;
  j["sample_id"] = r.sample_id;
  j["clean_path"] = r.clean_path;
  j["depth_path"] = r.depth_path;
  j["mor_path"] = r.mor_path;
  j["gt_bundle_paths"] = std::move(gt);
  j["recipe"] = recipe_to_json(r.recipe);
  j["toolkit_version"] = r.toolkit_version;
  return j;
}

inline ManifestRecord manifest_record_from_json(const nlohmann::ordered_json& j) {
  ManifestRecord r;
  try {
    r.sample_id = j.at("sample_id").get<std::string>();
    r.clean_path = j.at("clean_path").get<std::string>();
    r.depth_path = j.at("depth_path").get<std::string>();
    r.mor_path = j.at("mor_path").get<std::string>();
    const auto& gt = j.at("gt_bundle_paths");
    r.gt_bundle_paths.s_pattern = gt.at("s_pattern").get<std::string>();
    r.gt_bundle_paths.t_r = gt.at("t_r").get<std::string>();
    r.gt_bundle_paths.t = gt.at("t").get<std::string>();
    r.gt_bundle_paths.drop_layer = gt.at("drop_layer").get<std::string>();
    r.gt_bundle_paths.drop_mask = gt.at("drop_mask").get<std::string>();
    if (gt.contains("pfm")) r.gt_bundle_paths.pfm = gt.at("pfm").get<std::vector<std::string>>();
    r.toolkit_version = j.at("toolkit_version").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("manifest record: ") + e.what());
  }
  r.recipe = recipe_from_json(j.at("recipe"));
  return r;
}

/// Reads sample records from a JSONL manifest; the optional footer line is skipped.
inline std::vector<ManifestRecord> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open manifest");
  std::vector<ManifestRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::ordered_json::parse(line);
    if (j.contains("footer")) continue;
    out.push_back(manifest_record_from_json(j));
  }
  return out;
}

namespace detail {

inline Image plane_image(std::size_t w, std::size_t h, std::span<const double> v) {
  return Image(w, h, 1, std::vector<double>(v.begin(), v.end()));
}

inline Image mask_image(const DropField& f) {
  std::vector<double> v(f.mask().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f.mask()[i];
  return Image(f.width(), f.height(), 1, std::move(v));
}

inline ManifestRecord write_sample(const MorSample& s, const std::string& stem, const fs::path& clean_path,
                                   const fs::path& depth_path, const fs::path& out_dir, const SynthOptions& opt) {
  ManifestRecord rec;
  rec.sample_id = stem;
  rec.clean_path = clean_path.generic_string();
  rec.depth_path = depth_path.generic_string();
  rec.recipe = s.recipe;
  rec.mor_path = "mor/" + stem + ".png";
  const std::string gt = "gt/" + stem + "/";
  rec.gt_bundle_paths = {gt + "s_pattern.png", gt + "t_r.png", gt + "t.png", gt + "drop_layer.png",
                         gt + "drop_mask.png", {}};
  fs::create_directories(out_dir / "gt" / stem);
  const std::size_t w = s.clean.width(), h = s.clean.height();
  save_image(s.mor, out_dir / rec.mor_path, opt.mor_bits);
  save_image(s.s_pattern, out_dir / rec.gt_bundle_paths.s_pattern, kGtLayerBits);
  save_image(plane_image(w, h, s.t_r.data()), out_dir / rec.gt_bundle_paths.t_r, kGtLayerBits);
  save_image(plane_image(w, h, s.t.data()), out_dir / rec.gt_bundle_paths.t, kGtLayerBits);
  save_image(plane_image(w, h, s.drops.layer()), out_dir / rec.gt_bundle_paths.drop_layer, kGtLayerBits);
  save_image(mask_image(s.drops), out_dir / rec.gt_bundle_paths.drop_mask, 8);
  if (opt.write_pfm) {
    const std::pair<const char*, std::span<const double>> layers[] = {
        {"s_pattern", s.s_pattern.data()}, {"t_r", s.t_r.data()}, {"t", s.t.data()}, {"drop_layer", s.drops.layer()}};
    for (const auto& [name, data] : layers) {
      const std::string rel = gt + name + ".pfm";
      write_pfm(out_dir / rel, w, h, data);
      rec.gt_bundle_paths.pfm.push_back(rel);
    }
  }
  return rec;
}

inline TransmissionMap load_transmission(const fs::path& path) {
  const Image img = load_image(path);
  if (img.channels() != 1) throw IoError(path.string() + ": transmission layer must be single-channel");
  std::vector<double> v(img.data().begin(), img.data().end());
  // A layer that quantized to 0 is restored as the smallest positive value.
  for (double& x : v) x = std::max(x, std::numeric_limits<double>::min());
  return TransmissionMap(img.width(), img.height(), std::move(v));
}

}  // namespace detail

/// Synthesizes every clean/depth pair in the two directories into out_dir:
///   mor/<stem>.png, gt/<stem>/{s_pattern,t_r,t,drop_layer}.png (16-bit),
///   gt/<stem>/drop_mask.png (8-bit), optional .pfm copies, manifest.jsonl.
inline Manifest synth_batch(const fs::path& clean_dir, const fs::path& depth_dir, const fs::path& out_dir,
                            const RainRecipe& recipe_template, std::uint64_t global_seed, const SynthOptions& opt = {}) {
  recipe_template.validate();
  const auto clean = detail::index_by_stem(clean_dir, {".png", ".PNG"});
  const auto depth = detail::index_by_stem(depth_dir, {".pfm", ".PFM", ".png", ".PNG"});
  const StemPairs paired = detail::pair_by_stem(clean, depth);
  if (paired.pairs.empty()) throw NoPairsError("no pairs: no clean/depth files share a filename stem");

  std::error_code ec;
  fs::create_directories(out_dir / "mor", ec);
  if (ec) throw IoError(out_dir.string() + ": cannot create output directory (" + ec.message() + ")");

  Manifest m;
  m.unpaired = paired.unpaired;
  m.records.resize(paired.pairs.size());
  parallel_for(paired.pairs.size(), opt.threads, [&](std::size_t i) {
    const auto& [clean_path, depth_path] = paired.pairs[i];
    const std::string stem = clean_path.stem().string();
    const Image img = load_image(clean_path);
    const DepthMap d = load_depth_auto(depth_path, opt.depth_scale);
    const RainRecipe recipe = resolve_recipe(recipe_template, derive_seed(global_seed, stem));
    const MorSample s = synth_sample(img, d, recipe);
    m.records[i] = detail::write_sample(s, stem, clean_path, depth_path, out_dir, opt);
  });

  m.path = out_dir / "manifest.jsonl";
  std::ofstream out(m.path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError(m.path.string() + ": cannot write manifest");
  for (const auto& r : m.records) out << to_json(r).dump() << '\n';
  if (!m.unpaired.empty()) {
    nlohmann::ordered_json footer;
    footer["footer"] = {{"unpaired", m.unpaired}, {"sample_count", m.records.size()}};
    out << footer.dump() << '\n';
  }
  if (!out) throw IoError(m.path.string() + ": manifest write failed");
  return m;
}

/// Rebuilds a sample from its manifest record and the stored (quantized)
/// ground-truth layers. `mor` holds the stored image.
inline MorSample load_stored_sample(const fs::path& out_dir, const ManifestRecord& r, double depth_scale = 1.0) {
  MorSample s;
  s.recipe = r.recipe;
  s.clean = load_image(r.clean_path);
  s.depth = load_depth_auto(r.depth_path, depth_scale);
  s.mor = load_image(out_dir / r.mor_path);
  s.s_pattern = load_image(out_dir / r.gt_bundle_paths.s_pattern);
  s.t_r = detail::load_transmission(out_dir / r.gt_bundle_paths.t_r);
  s.t = detail::load_transmission(out_dir / r.gt_bundle_paths.t);
  const Image layer = load_image(out_dir / r.gt_bundle_paths.drop_layer);
  const Image mask = load_image(out_dir / r.gt_bundle_paths.drop_mask);
  std::vector<std::uint8_t> m(mask.data().size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = mask.data()[i] >= 0.5 ? 1 : 0;
  s.drops = DropField(layer.width(), layer.height(), std::move(m),
                      std::vector<double>(layer.data().begin(), layer.data().end()));
  return s;
}

// ---------------------------------------------------------------------------
// Evaluation

struct EvalOptions {
  SsimParams ssim;
  std::size_t dc_patch = kDefaultDarkChannelPatch;
  LossWeights weights;
  std::size_t threads = 0;
};

/// psnr, ssim, ms_ssim, l1 and rec_loss of pred against gt; dc_loss and
/// tv_loss of pred alone.
inline MetricsRecord eval_pair(const Image& pred, const Image& gt, const SsimParams& p = {},
                               std::size_t patch = kDefaultDarkChannelPatch, const LossWeights& w = {}) {
  MetricsRecord r;
  r.psnr_db = psnr(pred, gt);
  r.ssim = ssim(pred, gt, p);
  r.ms_ssim = ms_ssim(pred, gt, p);
  r.l1 = l1_image(pred, gt);
  r.dc_loss = dc_loss(pred, patch);
  r.tv_loss = tv_loss(pred);
  r.rec_loss = rec_loss_from_components(1.0 - r.ms_ssim, r.l1, w);
  return r;
}

struct MetricSummary {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double stddev = std::numeric_limits<double>::quiet_NaN();  // population
};

struct EvalReport {
  std::vector<MetricsRecord> records;  // stem-sorted, including failed pairs
  std::map<std::string, MetricSummary> aggregates;
  std::size_t pair_count = 0;
  std::size_t ok_count = 0;
  std::size_t failed_count = 0;
  std::vector<std::string> unpaired;
};

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"psnr_db", "ssim", "ms_ssim", "l1", "dc_loss", "tv_loss", "rec_loss"};
  return names;
}

inline double metric_value(const MetricsRecord& r, const std::string& name) {
  if (name == "psnr_db") return r.psnr_db;
  if (name == "ssim") return r.ssim;
  if (name == "ms_ssim") return r.ms_ssim;
  if (name == "l1") return r.l1;
  if (name == "dc_loss") return r.dc_loss;
  if (name == "tv_loss") return r.tv_loss;
  if (name == "rec_loss") return r.rec_loss;
  throw Error("unknown metric '" + name + "'");
}

/// Means and population standard deviations over the records that scored.
inline std::map<std::string, MetricSummary> aggregate(const std::vector<MetricsRecord>& records) {
  std::map<std::string, MetricSummary> out;
  for (const auto& name : metric_names()) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : records) {
      if (!r.ok()) continue;
      sum += metric_value(r, name);
      ++n;
    }
    MetricSummary s;
    if (n > 0) {
      s.mean = sum / static_cast<double>(n);
      double sq = 0.0;
      for (const auto& r : records) {
        if (r.ok()) sq += (metric_value(r, name) - s.mean) * (metric_value(r, name) - s.mean);
      }
      s.stddev = std::sqrt(sq / static_cast<double>(n));
    }
    out[name] = s;
  }
  return out;
}

/// Scores every stem-paired pred/gt PNG. A pair that fails to load or score
/// is kept with its error message and excluded from the aggregates.
inline EvalReport eval_batch(const fs::path& pred_dir, const fs::path& gt_dir, const EvalOptions& opt = {}) {
  opt.ssim.validate();
  const auto pred = detail::index_by_stem(pred_dir, {".png", ".PNG"});
  const auto gt = detail::index_by_stem(gt_dir, {".png", ".PNG"});
  const StemPairs paired = detail::pair_by_stem(pred, gt);
  if (paired.pairs.empty()) throw NoPairsError("no pairs: no prediction/ground-truth files share a filename stem");

  EvalReport rep;
  rep.unpaired = paired.unpaired;
  rep.records.resize(paired.pairs.size());
  parallel_for(paired.pairs.size(), opt.threads, [&](std::size_t i) {
    const auto& [pred_path, gt_path] = paired.pairs[i];
    MetricsRecord r;
    try {
      r = eval_pair(load_image(pred_path), load_image(gt_path), opt.ssim, opt.dc_patch, opt.weights);
    } catch (const std::exception& e) {
      r = MetricsRecord{};
      r.error = e.what();
    }
    r.id = pred_path.stem().string();
    rep.records[i] = std::move(r);
  });
  rep.pair_count = rep.records.size();
  for (const auto& r : rep.records) (r.ok() ? rep.ok_count : rep.failed_count)++;
  rep.aggregates = aggregate(rep.records);
  return rep;
}

namespace detail {

inline nlohmann::ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

inline std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

}  // namespace detail

/// One JSON object with stable keys psnr_db, ssim, ms_ssim, l1, dc_loss, tv_loss.
inline nlohmann::ordered_json to_json(const MetricsRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  if (!r.ok()) {
    j["error"] = *r.error;
    return j;
  }
  for (const auto& name : metric_names()) j[name] = metric_value(r, name);
  return j;
}

inline nlohmann::ordered_json to_json(const EvalReport& rep) {
  nlohmann::ordered_json j;
  j["pair_count"] = rep.pair_count;
  j["ok_count"] = rep.ok_count;
  j["failed_count"] = rep.failed_count;
  j["unpaired"] = rep.unpaired;
  nlohmann::ordered_json agg = nlohmann::ordered_json::object();
  for (const auto& name : metric_names()) {
    const auto& s = rep.aggregates.at(name);
    agg[name] = {{"mean", detail::number_or_null(s.mean)}, {"std", detail::number_or_null(s.stddev)}};
  }
  j["aggregate"] = std::move(agg);
  auto pairs = nlohmann::ordered_json::array();
  for (const auto& r : rep.records) pairs.push_back(to_json(r));
  j["pairs"] = std::move(pairs);
  return j;
}

/// Header, one row per pair, then a final "mean" aggregate row.
inline std::string report_csv(const EvalReport& rep) {
  std::ostringstream o;
  o << "id";
  for (const auto& name : metric_names()) o << ',' << name;
  o << ",error\n";
  for (const auto& r : rep.records) {
    o << r.id;
    for (const auto& name : metric_names()) o << ',' << (r.ok() ? format_double(metric_value(r, name)) : "");
    o << ',';
    if (!r.ok()) {
      std::string e = *r.error;
      std::replace(e.begin(), e.end(), '"', '\'');
      o << '"' << e << '"';
    }
    o << '\n';
  }
  o << "mean";
  for (const auto& name : metric_names()) o << ',' << detail::csv_number(rep.aggregates.at(name).mean);
  o << ",\n";
  return o.str();
}

inline void write_reports(const EvalReport& rep, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string() + ": cannot create output directory (" + ec.message() + ")");
  {
    std::ofstream j(out_dir / "report.json", std::ios::trunc);
    if (!j) throw IoError((out_dir / "report.json").string() + ": cannot write");
    j << to_json(rep).dump(2) << '\n';
  }
  std::ofstream c(out_dir / "report.csv", std::ios::trunc);
  if (!c) throw IoError((out_dir / "report.csv").string() + ": cannot write");
  c << report_csv(rep);
}

// ---------------------------------------------------------------------------
// Depth stratification

struct DepthBin {
  double depth_lo = 0.0;
  double depth_hi = 0.0;
  std::size_t count = 0;
  // NaN for empty bins.
  double mean_t = std::numeric_limits<double>::quiet_NaN();
  double mean_t_r = std::numeric_limits<double>::quiet_NaN();
  double streak_coverage = std::numeric_limits<double>::quiet_NaN();  // fraction with S_pattern > 0
  double drop_coverage = std::numeric_limits<double>::quiet_NaN();    // fraction with M = 1
};

inline std::size_t depth_bin_index(double d, double lo, double hi, std::size_t bins) {
  if (!(hi > lo)) return 0;
  const double f = (d - lo) / (hi - lo) * static_cast<double>(bins);
  return std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, std::floor(f))));
}

/// Equal-width depth bins over [min d, max d]. A constant depth map puts
/// every pixel in bin 0.
inline std::vector<DepthBin> stratify_by_depth(const MorSample& s, std::size_t bins) {
  if (bins == 0) throw Error("stratify_by_depth: bins must be >= 1");
  const auto d = s.depth.data();
  require_same_size(s.depth.size(), s.t.size(), "stratify_by_depth");
  require_same_size(s.depth.size(), s.t_r.size(), "stratify_by_depth");
  require_same_size(s.depth.size(), s.s_pattern.size(), "stratify_by_depth");
  require_same_size(s.depth.size(), s.drops.size(), "stratify_by_depth");
  const auto [mn, mx] = std::minmax_element(d.begin(), d.end());
  const double lo = *mn, hi = *mx;
  std::vector<DepthBin> out(bins);
  std::vector<double> sum_t(bins, 0.0), sum_tr(bins, 0.0), streak(bins, 0.0), drop(bins, 0.0);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].depth_lo = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
    out[b].depth_hi = lo + (hi - lo) * static_cast<double>(b + 1) / static_cast<double>(bins);
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::size_t b = depth_bin_index(d[i], lo, hi, bins);
    ++out[b].count;
    sum_t[b] += s.t.data()[i];
    sum_tr[b] += s.t_r.data()[i];
    streak[b] += s.s_pattern.data()[i] > 0.0 ? 1.0 : 0.0;
    drop[b] += s.drops.mask()[i] != 0 ? 1.0 : 0.0;
  }
  for (std::size_t b = 0; b < bins; ++b) {
    if (out[b].count == 0) continue;
    const double n = static_cast<double>(out[b].count);
    out[b].mean_t = sum_t[b] / n;
    out[b].mean_t_r = sum_tr[b] / n;
    out[b].streak_coverage = streak[b] / n;
    out[b].drop_coverage = drop[b] / n;
  }
  return out;
}

inline std::string stratification_csv(const std::vector<DepthBin>& bins) {
  std::ostringstream o;
  o << "bin,depth_lo,depth_hi,count,mean_t,mean_t_r,streak_coverage,drop_coverage\n";
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const auto& x = bins[b];
    o << b << ',' << format_double(x.depth_lo) << ',' << format_double(x.depth_hi) << ',' << x.count << ','
      << detail::csv_number(x.mean_t) << ',' << detail::csv_number(x.mean_t_r) << ','
      << detail::csv_number(x.streak_coverage) << ',' << detail::csv_number(x.drop_coverage) << '\n';
  }
  return o.str();
}

}  // namespace morkit
