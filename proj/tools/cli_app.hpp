#pragma once

// Command-line front end: synth, eval, stratify, selftest.
//
// Exit codes: 0 success, 1 no stem-paired inputs, 2 I/O or input failure,
// 3 self-test failure. Usage errors use CLI11's codes.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "morkit/morkit.hpp"
#include "morkit/selftest.hpp"

namespace morkit::cli {

enum ExitCode : int { kOk = 0, kNoPairs = 1, kIoFailure = 2, kSelftestFailure = 3 };

struct CliConfig {
  std::string command;
  std::string clean, depth, pred, gt, out, recipe, config;
  std::uint64_t seed = 0;
  double depth_scale = 1.0;
  std::size_t patch = kDefaultDarkChannelPatch;
  std::size_t scales = SsimParams{}.scales;
  std::size_t threads = 0;
  std::size_t bins = 10;
  double c1 = SsimParams{}.c1;
  double c2 = SsimParams{}.c2;
  double lambda1 = LossWeights{}.lambda1;
  double lambda2 = LossWeights{}.lambda2;
  double lambda3 = LossWeights{}.lambda3;
  double alpha_rec = LossWeights{}.alpha_rec;
  bool write_pfm = false;
  std::string inject_fault;

  SsimParams ssim_params() const {
    SsimParams p = SsimParams::with_scales(scales);
    p.c1 = c1;
    p.c2 = c2;
    return p;
  }
  LossWeights loss_weights() const { return {lambda1, lambda2, lambda3, alpha_rec}; }
};

/// Effective defaults as key = value lines (the keys accepted by --config).
inline std::string dump_defaults(const CliConfig& c = {}) {
  std::ostringstream o;
  o << "seed = " << c.seed << "\n"
    << "depth_scale = " << format_double(c.depth_scale) << "\n"
    << "patch = " << c.patch << "\n"
    << "scales = " << c.scales << "\n"
    << "threads = " << c.threads << "\n"
    << "bins = " << c.bins << "\n"
    << "c1 = " << format_double(c.c1) << "\n"
    << "c2 = " << format_double(c.c2) << "\n"
    << "lambda1 = " << format_double(c.lambda1) << "\n"
    << "lambda2 = " << format_double(c.lambda2) << "\n"
    << "lambda3 = " << format_double(c.lambda3) << "\n"
    << "alpha_rec = " << format_double(c.alpha_rec) << "\n";
  return o.str();
}

namespace detail {

inline void print_aggregates(const EvalReport& rep, std::ostream& out) {
  out << std::left << std::setw(10) << "metric" << std::right << std::setw(14) << "mean" << std::setw(14) << "std"
      << "\n";
  for (const auto& name : metric_names()) {
    const auto& s = rep.aggregates.at(name);
    out << std::left << std::setw(10) << name << std::right << std::fixed << std::setprecision(6) << std::setw(14)
        << s.mean << std::setw(14) << s.stddev << "\n";
  }
  out.unsetf(std::ios::floatfield);
}

inline void print_bins(const std::vector<DepthBin>& bins, std::ostream& out) {
  out << std::right << std::setw(4) << "bin" << std::setw(12) << "depth_lo" << std::setw(12) << "depth_hi"
      << std::setw(9) << "count" << std::setw(10) << "mean_t" << std::setw(10) << "mean_t_r" << std::setw(10)
      << "streak" << std::setw(10) << "drops" << "\n";
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const auto& x = bins[b];
    out << std::setw(4) << b << std::fixed << std::setprecision(3) << std::setw(12) << x.depth_lo << std::setw(12)
        << x.depth_hi << std::setw(9) << x.count << std::setprecision(5) << std::setw(10) << x.mean_t
        << std::setw(10) << x.mean_t_r << std::setw(10) << x.streak_coverage << std::setw(10) << x.drop_coverage
        << "\n";
  }
  out.unsetf(std::ios::floatfield);
}

inline RainRecipe recipe_or_default(const CliConfig& c) {
  return c.recipe.empty() ? RainRecipe{} : load_recipe(c.recipe);
}

inline void require_dir(const std::string& path, const char* flag) {
  if (path.empty()) throw IoError(std::string(flag) + " is required");
  if (!std::filesystem::is_directory(path)) throw IoError(path + ": " + flag + " must be an existing directory");
}

inline void require_file(const std::string& path, const char* flag) {
  if (path.empty()) throw IoError(std::string(flag) + " is required");
  if (!std::filesystem::is_regular_file(path)) throw IoError(path + ": " + flag + " must be an existing file");
}

}  // namespace detail

inline int cmd_synth(const CliConfig& c, std::ostream& out, std::ostream& err) {
  detail::require_dir(c.clean, "--clean");
  detail::require_dir(c.depth, "--depth");
  if (c.out.empty()) throw IoError("--out is required");
  const RainRecipe recipe = detail::recipe_or_default(c);
  SynthOptions opt;
  opt.threads = c.threads;
  opt.depth_scale = c.depth_scale;
  opt.write_pfm = c.write_pfm;
  const Manifest m = synth_batch(c.clean, c.depth, c.out, recipe, c.seed, opt);
  for (const auto& u : m.unpaired) err << "warning: unpaired file skipped: " << u << "\n";
  out << "samples: " << m.records.size() << "\n"
      << "manifest: " << m.path.generic_string() << "\n";
  return kOk;
}

inline int cmd_eval(const CliConfig& c, std::ostream& out, std::ostream& err) {
  detail::require_dir(c.pred, "--pred");
  detail::require_dir(c.gt, "--gt");
  EvalOptions opt;
  opt.ssim = c.ssim_params();
  opt.dc_patch = c.patch;
  opt.weights = c.loss_weights();
  opt.threads = c.threads;
  const EvalReport rep = eval_batch(c.pred, c.gt, opt);
  for (const auto& u : rep.unpaired) err << "warning: unpaired file skipped: " << u << "\n";
  for (const auto& r : rep.records) {
    if (!r.ok()) err << "warning: pair " << r.id << " not scored: " << *r.error << "\n";
  }
  if (!c.out.empty()) write_reports(rep, c.out);
  out << "pairs: " << rep.pair_count << " scored: " << rep.ok_count << " warnings: " << rep.failed_count << "\n";
  detail::print_aggregates(rep, out);
  return kOk;
}

inline int cmd_stratify(const CliConfig& c, std::ostream& out, std::ostream&) {
  detail::require_file(c.clean, "--clean");
  detail::require_file(c.depth, "--depth");
  const Image clean = load_image(c.clean);
  const DepthMap depth = load_depth_auto(c.depth, c.depth_scale);
  const std::string stem = std::filesystem::path(c.clean).stem().string();
  const RainRecipe recipe = resolve_recipe(detail::recipe_or_default(c), derive_seed(c.seed, stem));
  const auto bins = stratify_by_depth(synth_sample(clean, depth, recipe), c.bins);
  detail::print_bins(bins, out);
  if (!c.out.empty()) {
    std::ofstream f(c.out, std::ios::trunc);
    if (!f) throw IoError(c.out + ": cannot write stratification table");
    f << stratification_csv(bins);
  }
  return kOk;
}

inline int cmd_selftest(const CliConfig& c, std::ostream& out, std::ostream& err) {
  SelftestOptions opt;
  if (c.inject_fault == "ssim-c1") {
    opt.perturb_ssim_c1 = true;
  } else if (!c.inject_fault.empty()) {
    err << "error: unknown fault '" << c.inject_fault << "'\n";
    return kIoFailure;
  }
  const auto results = run_selftest(opt);
  out << format_selftest(results);
  for (const auto& r : results) {
    if (!r.passed) return kSelftestFailure;
  }
  return kOk;
}

namespace detail {

// Applies --config file values to every option not given on the command line.
inline void apply_config_file(CliConfig& c, const CLI::App& app) {
  const KeyValueFile file = KeyValueFile::load(c.config);
  KeyValueReader kv(file);
  auto given = [&](const char* flag) {
    for (const CLI::App* sub : app.get_subcommands()) {
      if (const auto* o = sub->get_option_no_throw(flag); o && o->count() > 0) return true;
    }
    return false;
  };
  auto str = [&](const char* key, const char* flag, std::string& field) {
    for (const char* section : {"", "run"}) {
      if (const auto* v = kv.take(section, key); v && !given(flag)) field = *v;
    }
  };
  auto num = [&](const char* key, const char* flag, auto& field) {
    for (const char* section : {"", "run"}) {
      const auto* v = kv.take(section, key);
      if (!v || given(flag)) continue;
      if constexpr (std::is_same_v<std::remove_reference_t<decltype(field)>, double>) {
        field = parse_double(*v, key);
      } else {
        field = static_cast<std::remove_reference_t<decltype(field)>>(parse_u64(*v, key));
      }
    }
  };
  str("clean", "--clean", c.clean);
  str("depth", "--depth", c.depth);
  str("pred", "--pred", c.pred);
  str("gt", "--gt", c.gt);
  str("out", "--out", c.out);
  str("recipe", "--recipe", c.recipe);
  num("seed", "--seed", c.seed);
  num("depth_scale", "--depth-scale", c.depth_scale);
  num("patch", "--patch", c.patch);
  num("scales", "--scales", c.scales);
  num("threads", "--threads", c.threads);
  num("bins", "--bins", c.bins);
  num("c1", "--c1", c.c1);
  num("c2", "--c2", c.c2);
  num("lambda1", "--lambda1", c.lambda1);
  num("lambda2", "--lambda2", c.lambda2);
  num("lambda3", "--lambda3", c.lambda3);
  num("alpha_rec", "--alpha-rec", c.alpha_rec);
  kv.reject_unknown();
}

}  // namespace detail

/// Parses `args` (args[0] is the program name) and runs the selected command.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig c;
  CLI::App app{"morkit: depth-guided mixture-of-rain synthesis and evaluation", "morkit"};
  app.require_subcommand(0, 1);
  bool print_defaults = false;
  app.add_flag("--print-defaults", print_defaults, "Print the effective default constants and exit");

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", c.config, "key = value config file; command-line flags override its values")
        ->check(CLI::ExistingFile);
    sub->add_option("--threads", c.threads, "Worker threads (0 = available parallelism)")->capture_default_str();
  };

  auto* synth = app.add_subcommand("synth", "Synthesize mixture-of-rain images from clean/depth pairs");
  synth->add_option("--clean", c.clean, "Directory of clean PNG images");
  synth->add_option("--depth", c.depth, "Directory of depth maps (.pfm or 16-bit .png)");
  synth->add_option("--out", c.out, "Output directory");
  synth->add_option("--recipe", c.recipe, "Recipe file (defaults to the built-in recipe)");
  synth->add_option("--seed", c.seed, "Global seed")->capture_default_str();
  synth->add_option("--depth-scale", c.depth_scale, "Depth units per integer step for 16-bit PNG depth")
      ->capture_default_str();
  synth->add_flag("--write-pfm", c.write_pfm, "Also write float PFM copies of the ground-truth layers");
  common(synth);

  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--pred", c.pred, "Directory of predicted PNG images");
  eval->add_option("--gt", c.gt, "Directory of ground-truth PNG images");
  eval->add_option("--out", c.out, "Directory for report.json and report.csv");
  eval->add_option("--patch", c.patch, "Dark channel patch size (odd)")->capture_default_str();
  eval->add_option("--scales", c.scales, "MS-SSIM scale count M")->capture_default_str();
  eval->add_option("--c1", c.c1, "SSIM constant C1")->capture_default_str();
  eval->add_option("--c2", c.c2, "SSIM constant C2")->capture_default_str();
  eval->add_option("--lambda1", c.lambda1, "Adversarial loss weight")->capture_default_str();
  eval->add_option("--lambda2", c.lambda2, "Dark channel loss weight")->capture_default_str();
  eval->add_option("--lambda3", c.lambda3, "Total variation loss weight")->capture_default_str();
  eval->add_option("--alpha-rec", c.alpha_rec, "MS-SSIM share of the reconstruction loss")->capture_default_str();
  common(eval);

  auto* strat = app.add_subcommand("stratify", "Per-depth-bin degradation statistics for one synthesized sample");
  strat->add_option("--clean", c.clean, "Clean PNG image");
  strat->add_option("--depth", c.depth, "Depth map (.pfm or 16-bit .png)");
  strat->add_option("--recipe", c.recipe, "Recipe file (defaults to the built-in recipe)");
  strat->add_option("--seed", c.seed, "Global seed")->capture_default_str();
  strat->add_option("--depth-scale", c.depth_scale, "Depth units per integer step for 16-bit PNG depth")
      ->capture_default_str();
  strat->add_option("--bins", c.bins, "Number of equal-width depth bins")->capture_default_str();
  strat->add_option("--out", c.out, "Optional CSV output file");
  common(strat);

  auto* self = app.add_subcommand("selftest", "Run the fixed-seed invariant checks");
  self->add_option("--inject-fault", c.inject_fault, "Test hook: perturb a constant (ssim-c1)");
  common(self);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  if (print_defaults) {
    out << dump_defaults();
    return kOk;
  }
  if (app.get_subcommands().empty()) {
    out << app.help();
    return kOk;
  }
  try {
    if (!c.config.empty()) detail::apply_config_file(c, app);
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "synth") return cmd_synth(c, out, err);
    if (name == "eval") return cmd_eval(c, out, err);
    if (name == "stratify") return cmd_stratify(c, out, err);
    return cmd_selftest(c, out, err);
  } catch (const NoPairsError& e) {
    err << "error: " << e.what() << "\n";
    return kNoPairs;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoFailure;
  }
}

}  // namespace morkit::cli
