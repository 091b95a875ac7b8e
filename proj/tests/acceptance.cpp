// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "demix/cli.hpp"
#include "demix/demix.hpp"
#include "support/oracle.hpp"
#include "support/synthetic.hpp"

using namespace demix;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> vec(const SoftLabel& l) { return {l.probs().begin(), l.probs().end()}; }

// In-memory dataset of random images, all of one size, classes i % c.
DatasetIndex memory_dataset(std::mt19937_64& gen, std::size_t n, ImageDims dims, std::size_t classes) {
  DatasetIndex ds;
  for (std::size_t i = 0; i < n; ++i) {
    ds.records.push_back({"mem_" + std::to_string(i) + ".png", i % classes});
    ds.images.push_back(synth::random_image(gen, dims));
  }
  ds.class_count = classes;
  return ds;
}

Verdict label_line() {
  Verdict v;
  const auto t0 = Clock::now();
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> classes(2, 200);
  double worst_entry = 0;
  double worst_sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const std::size_t c = classes(gen);
    const std::size_t a = std::uniform_int_distribution<std::size_t>(0, c - 1)(gen);
    const std::size_t b = std::uniform_int_distribution<std::size_t>(0, c - 1)(gen);
    const double lam = unit(gen);
    const auto ya = SoftLabel::one_hot(a, c);
    const auto yb = SoftLabel::one_hot(b, c);
    const auto mixed = mix_labels(ya, yb, lam);
    for (std::size_t k = 0; k < c; ++k) {
      const double want = (k == a ? 1.0 - lam : 0.0) + (k == b ? lam : 0.0);
      worst_entry = std::max(worst_entry, std::abs(mixed[k] - want));
    }
    worst_sum = std::max(worst_sum, std::abs(mixed.sum() - 1.0));
  }
  const double secs = seconds_since(t0);
  if (worst_entry > 1e-12) v.fail("entry error " + std::to_string(worst_entry));
  if (worst_sum > 1e-9) v.fail("sum error " + std::to_string(worst_sum));
  if (secs >= 5.0) v.fail("took " + std::to_string(secs) + "s");
  char buf[160];
  std::snprintf(buf, sizeof buf, "max entry err %.3g, max sum err %.3g, %.2fs", worst_entry, worst_sum, secs);
  if (v.pass) v.detail = buf;
  return v;
}

Verdict oracle_equivalence() {
  Verdict v;
  const auto t0 = Clock::now();
  std::mt19937_64 gen(2);
  std::uniform_int_distribution<int> side(1, 16);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Method methods[] = {Method::demix, Method::cutmix, Method::saliencymix, Method::cutout};
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Method m = methods[trial % 4];
    const ImageDims da{side(gen), side(gen)};
    ImageDims db = da;
    if (m == Method::demix || m == Method::cutmix) db = ImageDims{side(gen), side(gen)};
    if (m == Method::saliencymix) db = ImageDims{da.width + side(gen) / 4, da.height + side(gen) / 4};
    const auto a = synth::random_image(gen, da);
    const auto b = synth::random_image(gen, db);
    const auto c = static_cast<std::size_t>(side(gen)) + 1;
    const auto ya = SoftLabel::one_hot(static_cast<std::size_t>(trial) % c, c);
    const auto yb = SoftLabel::one_hot(static_cast<std::size_t>(trial * 7 + 1) % c, c);

    MixPlan plan;
    plan.method = m;
    plan.lambda_nominal = unit(gen);
    plan.crop = crop_box_from_lambda(plan.lambda_nominal, da, {unit(gen), unit(gen)});
    if (m == Method::demix && unit(gen) < 0.8) {
      const auto box = clip_to(static_cast<int>(unit(gen) * db.width), static_cast<int>(unit(gen) * db.height),
                               side(gen), side(gen), db);
      if (box) plan.source_box = *box;
    }
    const auto got = apply_plan(plan, a, ya, b, yb);
    const auto want = oracle::compose(plan, a, vec(ya), b, vec(yb));
    if (!(got.image == want.image) || got.lambda_eff != want.lambda_eff || vec(got.label) != want.label) {
      v.fail("mismatch at trial " + std::to_string(trial) + " (" + std::string(to_string(m)) + ")");
      break;
    }
    ++checked;
  }
  const double secs = seconds_since(t0);
  if (secs >= 30.0) v.fail("took " + std::to_string(secs) + "s");
  if (v.pass) v.detail = std::to_string(checked) + " plans bit-identical, " + std::to_string(secs).substr(0, 5) + "s";
  return v;
}

Verdict fallback_contract() {
  Verdict v;
  std::mt19937_64 gen(3);
  const auto ds = memory_dataset(gen, 8, {16, 12}, 3);
  AugmentConfig cfg;
  cfg.method = Method::demix;
  const DetectionMap empty_sidecar;
  const DetectionMap listed_but_empty{{ds.records[0].path, DetectionSet{ds.records[0].path, {16, 12}, {}}}};
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    cfg.master_seed = seed;
    const auto& dets = (seed % 2) ? empty_sidecar : listed_but_empty;
    const auto plan = plan_for_ordinal(seed % ds.size(), cfg, ds, dets);
    if (!plan.fallback || plan.source_box) {
      v.fail("seed " + std::to_string(seed) + " not flagged as fallback");
      break;
    }
    const auto t = plan.target_index;
    const auto s = plan.source_index;
    const auto d = demix::demix(ds.images[t], ds.label(t), ds.images[s], ds.label(s), plan);
    const auto c = cutmix(ds.images[t], ds.label(t), ds.images[s], ds.label(s), plan);
    if (!(d.image == c.image) || !(d.label == c.label) || d.lambda_eff != c.lambda_eff) {
      v.fail("seed " + std::to_string(seed) + " differs from cutmix");
      break;
    }
    ++compared;
  }
  if (v.pass) v.detail = std::to_string(compared) + " seeds bit-identical to cutmix";
  return v;
}

Verdict identity_cases() {
  Verdict v;
  std::mt19937_64 gen(4);
  const auto ds = memory_dataset(gen, 6, {20, 14}, 4);
  DetectionMap dets;
  for (const auto& r : ds.records)
    dets[r.path] = DetectionSet{r.path, {20, 14}, {{PixelBox{2, 2, 8, 6}, 0.9, "x"}}};

  int cases = 0;
  for (Method m : {Method::demix, Method::cutmix, Method::mixup, Method::cutout, Method::saliencymix}) {
    AugmentConfig cfg;
    cfg.method = m;
    cfg.lambda = LambdaPolicy::fixed(0.0);
    for (std::uint64_t o = 0; o < 60; ++o) {
      cfg.master_seed = o * 31;
      const auto plan = plan_for_ordinal(o % ds.size(), cfg, ds, dets);
      const auto t = plan.target_index;
      const auto s = plan.source_index;
      const auto out = apply_plan(plan, ds.images[t], ds.label(t), ds.images[s], ds.label(s));
      if (!(out.image == ds.images[t]) || !(out.label == ds.label(t)) || out.lambda_eff != 0.0) {
        v.fail(std::string(to_string(m)) + " with fixed(0) changed the target");
        return v;
      }
      ++cases;
    }
  }
  AugmentConfig cfg;
  cfg.method = Method::cutmix;
  cfg.lambda = LambdaPolicy::fixed(1.0);
  for (std::uint64_t o = 0; o < 60; ++o) {
    const auto plan = plan_for_ordinal(o % ds.size(), cfg, ds, dets);
    const auto t = plan.target_index;
    const auto s = plan.source_index;
    const auto out = apply_plan(plan, ds.images[t], ds.label(t), ds.images[s], ds.label(s));
    if (!(out.label == ds.label(s)) || !(out.image == ds.images[s])) {
      v.fail("cutmix with fixed(1) did not yield the source sample");
      return v;
    }
    ++cases;
  }
  v.detail = std::to_string(cases) + " identity samples exact";
  return v;
}

Verdict parallel_determinism() {
  Verdict v;
  synth::TempDir tmp("acc-par");
  const auto files = synth::write_dataset(tmp.path(), 200, {48, 40}, 10, 5);
  const auto ds = load_dataset(files.labels, files.images_root);
  const auto dets = parse_sidecar(synth::slurp(files.sidecar));
  AugmentConfig cfg;
  cfg.method = Method::demix;
  cfg.master_seed = 2024;
  std::vector<std::pair<std::string, std::string>> reference;
  for (std::size_t workers : {1, 4, 8}) {
    cfg.workers = workers;
    const auto out = tmp.path() / ("w" + std::to_string(workers));
    run(cfg, ds, dets, out);
    auto snap = synth::snapshot(out);
    if (snap.size() != 201) v.fail("expected 201 files, got " + std::to_string(snap.size()));
    if (reference.empty())
      reference = std::move(snap);
    else if (snap != reference)
      v.fail("workers=" + std::to_string(workers) + " output differs from workers=1");
  }
  if (v.pass) v.detail = "200 images + manifest byte-identical for workers 1/4/8";
  return v;
}

Verdict geometry() {
  Verdict v;
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> side(1, 512);
  int boxes = 0;
  for (int i = 0; i < 10000; ++i) {
    const ImageDims dims{side(gen), side(gen)};
    const double lam = unit(gen);
    const auto box = crop_box_from_lambda(lam, dims, {unit(gen), unit(gen)});
    const auto w = std::llround(std::floor(dims.width * std::sqrt(lam) + 0.5));
    const auto h = std::llround(std::floor(dims.height * std::sqrt(lam) + 0.5));
    const double expected = static_cast<double>(w * h) / (static_cast<double>(dims.width) * dims.height);
    if (!box) {
      if (w * h != 0) v.fail("missing box for nonzero area");
      continue;
    }
    ++boxes;
    if (box->x0 < 0 || box->y0 < 0 || box->x0 + box->w > dims.width || box->y0 + box->h > dims.height)
      v.fail("box out of bounds");
    if (effective_lambda(mask_from_box(*box, dims)) != expected) v.fail("lambda_eff mismatch");
  }
  if (v.pass) v.detail = std::to_string(boxes) + " boxes in bounds with exact lambda_eff";
  return v;
}

Verdict fixed_lambda_sweep() {
  Verdict v;
  synth::TempDir tmp("acc-sweep");
  const auto files = synth::write_dataset(tmp.path(), 6, {224, 224}, 3, 7);
  const double W = 224;
  const double H = 224;
  const double bound = (W + H + 1) / (W * H);
  double worst = 0;
  for (int k = 1; k <= 9; ++k) {
    char value[8];
    std::snprintf(value, sizeof value, "0.%d", k);
    const double lam = std::stod(value);
    const auto out = tmp.path() / ("v" + std::to_string(k));
    std::ostringstream o;
    std::ostringstream e;
    const int code = cli::run_cli({"augment", "--images", files.images_root.string(), "--labels",
                                   files.labels.string(), "--detections", files.sidecar.string(), "--out",
                                   out.string(), "--method", "demix", "--lambda-fixed", value, "--per-image",
                                   "3", "--seed", std::to_string(k)},
                                  o, e);
    if (code != 0) {
      v.fail("augment exited " + std::to_string(code) + ": " + e.str());
      return v;
    }
    for (const auto& row : read_manifest(out / kManifestName)) {
      if (row.lambda_nominal != lam) v.fail("lambda_nominal " + std::to_string(row.lambda_nominal));
      worst = std::max(worst, std::abs(row.lambda_eff - lam));
    }
  }
  if (worst > bound) v.fail("max |lambda_eff - v| = " + std::to_string(worst));
  char buf[160];
  std::snprintf(buf, sizeof buf, "max |lambda_eff - v| = %.3g <= %.3g", worst, bound);
  if (v.pass) v.detail = buf;
  return v;
}

Verdict throughput() {
  Verdict v;
  synth::TempDir tmp("acc-speed");
  const auto files = synth::write_dataset(tmp.path(), 100, {224, 224}, 10, 8);
  const auto t0 = Clock::now();
  const auto ds = load_dataset(files.labels, files.images_root);
  const auto dets = parse_sidecar(synth::slurp(files.sidecar));
  AugmentConfig cfg;
  cfg.method = Method::demix;
  cfg.outputs_per_image = 10;
  const auto result = run(cfg, ds, dets, tmp.path() / "out");
  const double secs = seconds_since(t0);
  if (result.records.size() != 1000) v.fail("wrote " + std::to_string(result.records.size()));
  if (secs >= 60.0) v.fail("took " + std::to_string(secs) + "s");
  char buf[96];
  std::snprintf(buf, sizeof buf, "1000 samples in %.2fs on %zu worker(s)", secs, resolve_workers(0));
  if (v.pass) v.detail = buf;
  return v;
}

} // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"label line over 1e5 one-hot triples", label_line},
      {"oracle equivalence on 1000 random plans", oracle_equivalence},
      {"fallback equals cutmix for 1000 seeds", fallback_contract},
      {"identity cases fixed(0) / fixed(1)", identity_cases},
      {"determinism under workers 1/4/8", parallel_determinism},
      {"geometry over 1e4 random crops", geometry},
      {"fixed-lambda sweep 0.1..0.9 at 224x224", fixed_lambda_sweep},
      {"throughput 1000 samples at 224x224", throughput},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    std::printf("[%s] %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    failed += v.pass ? 0 : 1;
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
