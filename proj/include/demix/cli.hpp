#pragma once

#include <array>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "demix/detection.hpp"
#include "demix/error.hpp"
#include "demix/geometry.hpp"
#include "demix/mixers.hpp"
#include "demix/pipeline.hpp"
#include "demix/resample.hpp"
#include "demix/rng.hpp"

namespace demix::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct AugmentFlags {
  std::string images;
  std::string labels;
  std::string detections;
  std::string out;
  std::string method;
  std::optional<double> lambda_fixed;
  std::optional<double> lambda_beta;
  double score_threshold = 0.7;
  std::string box_policy = "max-score";
  std::size_t per_image = 1;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
};

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string format_summary(std::size_t samples, std::size_t fallbacks, double seconds) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "wrote %zu samples (%zu fallbacks) in %.2fs", samples, fallbacks,
                seconds);
  return buf;
}

inline int augment_cmd(const AugmentFlags& f, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();

  AugmentConfig cfg;
  cfg.method = *parse_method(f.method);
  if (f.lambda_fixed) cfg.lambda = LambdaPolicy::fixed(*f.lambda_fixed);
  if (f.lambda_beta) cfg.lambda = LambdaPolicy::beta(*f.lambda_beta);
  cfg.box_policy = BoxSelectPolicy{*parse_box_select_mode(f.box_policy), f.score_threshold};
  cfg.master_seed = f.seed;
  cfg.outputs_per_image = f.per_image;
  cfg.workers = f.workers;

  const DatasetIndex ds = load_dataset(f.labels, f.images);
  DetectionMap dets;
  if (!f.detections.empty()) dets = parse_sidecar(read_text_file(f.detections));

  const RunResult result = run(cfg, ds, dets, f.out);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out << format_summary(result.records.size(), result.fallback_count, secs) << '\n';
  return kExitOk;
}

/// Validate a sidecar and print per-image box counts plus a ten-bin score
/// histogram over [0,1].
inline int inspect_sidecar_cmd(const std::string& path, std::ostream& out) {
  const DetectionMap dets = parse_sidecar(read_text_file(path));
  std::array<std::size_t, 10> bins{};
  std::size_t total = 0;
  for (const auto& [key, set] : dets) {
    out << key << ": " << set.boxes.size() << " boxes\n";
    for (const auto& b : set.boxes) {
      const auto bin = std::min<std::size_t>(static_cast<std::size_t>(b.score * 10.0), 9);
      ++bins[bin];
      ++total;
    }
  }
  out << "score histogram:\n";
  for (std::size_t i = 0; i < bins.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "  [%.1f, %.1f%c %zu\n", i / 10.0, (i + 1) / 10.0,
                  i + 1 == bins.size() ? ']' : ')', bins[i]);
    out << buf;
  }
  out << dets.size() << " images, " << total << " boxes\n";
  return kExitOk;
}

/// Quick built-in sanity checks on known values.
inline int self_test_cmd(std::ostream& out) {
  int passed = 0;
  std::vector<std::string> failed;
  auto check = [&](const char* name, bool ok) {
    if (ok)
      ++passed;
    else
      failed.emplace_back(name);
  };

  check("seed finalizer of zero", derive_sample_seed(0, 0) == 0);
  check("seed for ordinal 1", derive_sample_seed(0, 1) == 0xE220A8397B1DCDAFULL);
  check("quarter-area crop",
        crop_box_from_lambda(0.25, {224, 224}, {0.0, 0.0}) == PixelBox{0, 0, 112, 112});
  check("full crop", crop_box_from_lambda(1.0, {100, 50}, {0.7, 0.3}) == PixelBox{0, 0, 100, 50});
  check("zero crop", !crop_box_from_lambda(0.0, {100, 50}, {0.5, 0.5}).has_value());
  {
    ImageBuffer strip(ImageDims{2, 1}, std::vector<std::uint8_t>{10, 10, 10, 20, 20, 20});
    const auto r = resize_patch(strip, {0, 0, 2, 1}, {4, 1});
    check("bilinear upsample",
          r.at(0, 0)[0] == 10 && r.at(1, 0)[0] == 13 && r.at(2, 0)[0] == 18 && r.at(3, 0)[0] == 20);
  }
  {
    ImageBuffer a(ImageDims{8, 8}, Rgb{0, 0, 0});
    ImageBuffer b(ImageDims{8, 8}, Rgb{200, 100, 50});
    MixPlan plan;
    plan.method = Method::demix;
    plan.crop = PixelBox{2, 2, 4, 4};
    plan.source_box = PixelBox{0, 0, 4, 4};
    const auto s = demix(a, SoftLabel::one_hot(0, 3), b, SoftLabel::one_hot(1, 3), plan);
    check("detection-guided label mix",
          s.lambda_eff == 0.25 && s.label[0] == 0.75 && s.label[1] == 0.25 && s.label[2] == 0.0);
    check("detection-guided paste", s.image.at(2, 2) == Rgb{200, 100, 50} && s.image.at(1, 1) == Rgb{0, 0, 0});
  }
  {
    DetectionSet set{"a.png", {100, 100}, {{{0, 0, 5, 5}, 0.9, ""}, {{1, 1, 5, 5}, 0.9, ""}}};
    const auto pick = select_box(set, {}, 0.0);
    check("max-score tie-break", pick && pick->box == PixelBox{0, 0, 5, 5});
  }

  for (const auto& name : failed) out << "FAIL " << name << '\n';
  out << "self-test: " << passed << " passed, " << failed.size() << " failed\n";
  return failed.empty() ? kExitOk : kExitRuntime;
}

/// Entry point shared by the executable and the tests. Always returns 0, 1 or 2.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Detection-guided CutMix and baseline augmentations", "demix"};
  app.require_subcommand(1);

  AugmentFlags f;
  auto* augment = app.add_subcommand("augment", "Materialize an augmented dataset");
  augment->add_option("--images", f.images, "Image root directory")->required();
  augment->add_option("--labels", f.labels, "Labels file (path<TAB>class per line)")->required();
  augment->add_option("--detections", f.detections, "Detections sidecar (required for demix)");
  augment->add_option("--out", f.out, "Output directory")->required();
  augment->add_option("--method", f.method, "Augmentation method")
      ->required()
      ->check(CLI::IsMember({"demix", "cutmix", "mixup", "cutout", "saliencymix"}));
  auto* fixed = augment->add_option("--lambda-fixed", f.lambda_fixed, "Use this mix ratio for every sample")
                    ->check(CLI::Range(0.0, 1.0));
  auto* beta = augment->add_option("--lambda-beta", f.lambda_beta, "Draw the mix ratio from Beta(A,A)")
                   ->check(CLI::PositiveNumber);
  fixed->excludes(beta);
  augment->add_option("--score-threshold", f.score_threshold, "Minimum detection score")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  augment->add_option("--box-policy", f.box_policy, "Detection choice")
      ->capture_default_str()
      ->check(CLI::IsMember({"max-score", "max-area", "random"}));
  augment->add_option("--per-image", f.per_image, "Outputs per input image")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  augment->add_option("--seed", f.seed, "Master seed")->capture_default_str();
  augment->add_option("--workers", f.workers, "Worker threads (default: available cores)");

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect-sidecar", "Validate and summarize a detections sidecar");
  inspect->add_option("--detections", inspect_path, "Detections sidecar")->required();

  auto* self_test = app.add_subcommand("self-test", "Run built-in consistency checks");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help("", CLI::AppFormatMode::All);
    return kExitUsage;
  }

  try {
    if (augment->parsed()) {
      if (f.method == "demix" && f.detections.empty()) {
        err << "error: --detections is required when --method demix\n\n" << augment->help();
        return kExitUsage;
      }
      return augment_cmd(f, out);
    }
    if (inspect->parsed()) return inspect_sidecar_cmd(inspect_path, out);
    if (self_test->parsed()) return self_test_cmd(out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (...) {
    err << "error: unknown failure\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

inline int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

} // namespace demix::cli
