#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "demix/detection.hpp"
#include "demix/error.hpp"
#include "demix/geometry.hpp"
#include "demix/image.hpp"
#include "demix/mixers.hpp"
#include "demix/png_io.hpp"
#include "demix/rng.hpp"

namespace demix {

struct DatasetRecord {
  std::string path;  // relative to the images root; also the sidecar key
  std::size_t class_index = 0;
};

/// Labelled images in labels-file order, decoded up front.
struct DatasetIndex {
  std::filesystem::path root;
  std::vector<DatasetRecord> records;
  std::size_t class_count = 0;
  std::vector<ImageBuffer> images;

  std::size_t size() const noexcept { return records.size(); }
  SoftLabel label(std::size_t i) const {
    return SoftLabel::one_hot(records.at(i).class_index, class_count);
  }
};

/// Read `path<TAB>class_index` lines and decode every referenced image.
/// Blank lines are ignored; class indices need not be contiguous.
inline DatasetIndex load_dataset(const std::filesystem::path& labels_file,
                                 const std::filesystem::path& images_root) {
  std::ifstream in(labels_file, std::ios::binary);
  if (!in) throw IoError("cannot open labels file '" + labels_file.string() + "'");

  DatasetIndex ds;
  ds.root = images_root;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tab = line.rfind('\t');
    const auto where = labels_file.string() + ":" + std::to_string(line_no);
    if (tab == std::string::npos || tab == 0)
      throw ValidationError(where + ": expected 'path<TAB>class_index'");
    DatasetRecord rec{line.substr(0, tab), 0};
    const auto cls = line.substr(tab + 1);
    std::size_t used = 0;
    long long value = -1;
    try {
      value = std::stoll(cls, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != cls.size() || cls.empty() || value < 0)
      throw ValidationError(where + ": invalid class index '" + cls + "'");
    rec.class_index = static_cast<std::size_t>(value);
    if (!seen.insert(rec.path).second)
      throw ValidationError(where + ": duplicate image path '" + rec.path + "'");
    ds.records.push_back(std::move(rec));
  }
  if (ds.records.empty()) throw ValidationError("empty dataset");

  std::size_t max_class = 0;
  ds.images.reserve(ds.records.size());
  for (const auto& rec : ds.records) {
    max_class = std::max(max_class, rec.class_index);
    const auto file = images_root / rec.path;
    if (!std::filesystem::is_regular_file(file))
      throw IoError("missing image file '" + file.string() + "'");
    ds.images.push_back(read_png(file));
  }
  ds.class_count = max_class + 1;
  return ds;
}

struct LambdaPolicy {
  enum class Kind { uniform, beta, fixed };
  Kind kind = Kind::uniform;
  double value = 1.0;  // alpha for beta, lambda for fixed

  static LambdaPolicy uniform() { return {Kind::uniform, 1.0}; }
  static LambdaPolicy beta(double alpha) { return {Kind::beta, alpha}; }
  static LambdaPolicy fixed(double lambda) { return {Kind::fixed, lambda}; }
};

struct AugmentConfig {
  Method method = Method::demix;
  LambdaPolicy lambda = LambdaPolicy::uniform();
  BoxSelectPolicy box_policy;
  std::uint64_t master_seed = 0;
  std::size_t outputs_per_image = 1;
  std::size_t workers = 0;  // 0: one per hardware thread
};

inline void validate_config(const AugmentConfig& cfg, const DatasetIndex& ds) {
  if (cfg.lambda.kind == LambdaPolicy::Kind::fixed &&
      !(cfg.lambda.value >= 0.0 && cfg.lambda.value <= 1.0))
    throw ConfigError("fixed lambda must lie in [0,1]");
  if (cfg.lambda.kind == LambdaPolicy::Kind::beta && !(cfg.lambda.value > 0.0))
    throw ConfigError("beta alpha must be > 0");
  if (!(cfg.box_policy.threshold >= 0.0 && cfg.box_policy.threshold <= 1.0))
    throw ConfigError("score threshold must lie in [0,1]");
  if (cfg.outputs_per_image < 1) throw ConfigError("outputs per image must be >= 1");
  if (needs_source(cfg.method) && ds.size() < 2)
    throw ConfigError(std::string(to_string(cfg.method)) + " needs at least 2 images, dataset has " +
                      std::to_string(ds.size()));
}

/// Reject sidecar entries whose recorded size disagrees with the decoded image.
inline void check_detections_match(const DetectionMap& dets, const DatasetIndex& ds) {
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto it = dets.find(ds.records[i].path);
    if (it == dets.end()) continue;
    if (it->second.dims != ds.images[i].dims())
      throw ValidationError("sidecar size " + to_string(it->second.dims) + " for '" +
                            ds.records[i].path + "' does not match image size " +
                            to_string(ds.images[i].dims()));
  }
}

inline double draw_lambda(const LambdaPolicy& policy, Xorshift64Star& rng) {
  switch (policy.kind) {
  case LambdaPolicy::Kind::uniform: return rng.uniform();
  case LambdaPolicy::Kind::beta: return sample_beta(rng, policy.value);
  case LambdaPolicy::Kind::fixed: return policy.value;
  }
  return policy.value;
}

/// Uniform partner index in [0, n) other than `target`, by rejection.
inline std::size_t pair_source(std::size_t target, std::size_t n, Xorshift64Star& rng) {
  if (n < 2) throw ConfigError("pairing needs at least 2 images");
  for (;;) {
    auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
    idx = std::min(idx, n - 1);
    if (idx != target) return idx;
  }
}

/// Resolve all randomness for one sample. Draw order is fixed: lambda (none
/// for the fixed policy), crop u1, crop u2, pairing draws, box-selection u.
inline MixPlan build_plan(std::size_t target_index, const AugmentConfig& cfg,
                          const DatasetIndex& ds, const DetectionMap& dets,
                          Xorshift64Star& rng) {
  MixPlan plan;
  plan.method = cfg.method;
  plan.target_index = target_index;
  plan.lambda_nominal = draw_lambda(cfg.lambda, rng);
  const std::array<double, 2> u{rng.uniform(), rng.uniform()};
  if (cfg.method != Method::mixup && cfg.method != Method::none)
    plan.crop = crop_box_from_lambda(plan.lambda_nominal, ds.images.at(target_index).dims(), u);
  plan.source_index =
      needs_source(cfg.method) ? pair_source(target_index, ds.size(), rng) : target_index;
  const double u_box = rng.uniform();

  if (cfg.method == Method::demix) {
    const auto it = dets.find(ds.records[plan.source_index].path);
    std::optional<ScoredBox> chosen;
    if (it != dets.end()) chosen = select_box(it->second, cfg.box_policy, u_box);
    if (chosen) plan.source_box = chosen->box;
    plan.fallback = !chosen.has_value();
  }
  return plan;
}

/// Plan for sample ordinal `o`, whose randomness comes solely from
/// derive_sample_seed(master_seed, o).
inline MixPlan plan_for_ordinal(std::uint64_t ordinal, const AugmentConfig& cfg,
                                const DatasetIndex& ds, const DetectionMap& dets) {
  const auto seed = derive_sample_seed(cfg.master_seed, ordinal);
  Xorshift64Star rng(seed);
  auto plan = build_plan(static_cast<std::size_t>(ordinal / cfg.outputs_per_image), cfg, ds,
                         dets, rng);
  plan.sample_seed = seed;
  return plan;
}

/// One manifest row.
struct AugmentedRecord {
  std::uint64_t ordinal = 0;
  std::string output_path;  // relative to the output directory
  SoftLabel label;
  Method method = Method::none;
  double lambda_nominal = 0.0;
  double lambda_eff = 0.0;
  std::size_t target_index = 0;
  std::size_t source_index = 0;
  std::size_t target_class = 0;
  std::size_t source_class = 0;
  std::uint64_t sample_seed = 0;
  std::optional<PixelBox> source_box;
  std::optional<PixelBox> crop;
  bool fallback = false;
};

namespace detail {

inline nlohmann::ordered_json box_json(const std::optional<PixelBox>& b) {
  if (!b) return nullptr;
  return nlohmann::ordered_json::array({b->x0, b->y0, b->w, b->h});
}

inline std::optional<PixelBox> box_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return PixelBox{j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<int>()};
}

inline std::string ordinal_ranges(const std::vector<std::uint64_t>& ords) {
  std::string s;
  for (std::size_t i = 0; i < ords.size();) {
    std::size_t j = i;
    while (j + 1 < ords.size() && ords[j + 1] == ords[j] + 1) ++j;
    if (!s.empty()) s += ",";
    s += std::to_string(ords[i]);
    if (j > i) s += "-" + std::to_string(ords[j]);
    i = j + 1;
  }
  return s.empty() ? "none" : s;
}

} // namespace detail

/// Manifest keys, in emission order.
inline constexpr const char* kManifestKeys[] = {
    "ordinal",      "output",       "label",        "method",      "lambda_nominal",
    "lambda_eff",   "target_index", "source_index", "target_class", "source_class",
    "sample_seed",  "crop",         "source_box",   "fallback"};

inline std::string to_manifest_line(const AugmentedRecord& r) {
  nlohmann::ordered_json j;
  j["ordinal"] = r.ordinal;
  j["output"] = r.output_path;
  j["label"] = std::vector<double>(r.label.probs().begin(), r.label.probs().end());
  j["method"] = std::string(to_string(r.method));
  j["lambda_nominal"] = r.lambda_nominal;
  j["lambda_eff"] = r.lambda_eff;
  j["target_index"] = r.target_index;
  j["source_index"] = r.source_index;
  j["target_class"] = r.target_class;
  j["source_class"] = r.source_class;
  j["sample_seed"] = r.sample_seed;
  j["crop"] = detail::box_json(r.crop);
  j["source_box"] = detail::box_json(r.source_box);
  j["fallback"] = r.fallback;
  return j.dump();
}

inline AugmentedRecord from_manifest_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line.begin(), line.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("manifest parse error: ") + e.what(), e.byte);
  }
  AugmentedRecord r;
  r.ordinal = j.at("ordinal").get<std::uint64_t>();
  r.output_path = j.at("output").get<std::string>();
  r.label = SoftLabel(j.at("label").get<std::vector<double>>());
  const auto m = parse_method(j.at("method").get<std::string>());
  if (!m) throw ValidationError("manifest: unknown method");
  r.method = *m;
  r.lambda_nominal = j.at("lambda_nominal").get<double>();
  r.lambda_eff = j.at("lambda_eff").get<double>();
  r.target_index = j.at("target_index").get<std::size_t>();
  r.source_index = j.at("source_index").get<std::size_t>();
  r.target_class = j.at("target_class").get<std::size_t>();
  r.source_class = j.at("source_class").get<std::size_t>();
  r.sample_seed = j.at("sample_seed").get<std::uint64_t>();
  r.crop = detail::box_from_json(j.at("crop"));
  r.source_box = detail::box_from_json(j.at("source_box"));
  r.fallback = j.at("fallback").get<bool>();
  return r;
}

inline std::vector<AugmentedRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  std::vector<AugmentedRecord> rows;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(from_manifest_line(line));
  return rows;
}

/// Thrown when some samples could not be produced; lists what did finish.
class RunError : public IoError {
public:
  RunError(const std::string& what, std::vector<std::uint64_t> completed)
      : IoError(what), completed_(std::move(completed)) {}
  const std::vector<std::uint64_t>& completed() const noexcept { return completed_; }

private:
  std::vector<std::uint64_t> completed_;
};

struct RunResult {
  std::vector<AugmentedRecord> records;  // ordinal order
  std::size_t fallback_count = 0;
};

inline constexpr const char* kManifestName = "manifest.jsonl";
inline constexpr const char* kImagesDir = "images";

inline std::string output_name(std::uint64_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06llu.png", static_cast<unsigned long long>(ordinal));
  return std::string(kImagesDir) + "/" + buf;
}

/// Produce one sample (no I/O).
inline std::pair<AugmentedRecord, MixedSample> augment_one(std::uint64_t ordinal,
                                                           const AugmentConfig& cfg,
                                                           const DatasetIndex& ds,
                                                           const DetectionMap& dets) {
  const MixPlan plan = plan_for_ordinal(ordinal, cfg, ds, dets);
  const auto t = plan.target_index;
  const auto s = plan.source_index;
  MixedSample sample = apply_plan(plan, ds.images[t], ds.label(t), ds.images[s], ds.label(s));

  AugmentedRecord rec;
  rec.ordinal = ordinal;
  rec.output_path = output_name(ordinal);
  rec.label = sample.label;
  rec.method = plan.method;
  rec.lambda_nominal = plan.lambda_nominal;
  rec.lambda_eff = sample.lambda_eff;
  rec.target_index = t;
  rec.source_index = s;
  rec.target_class = ds.records[t].class_index;
  rec.source_class = ds.records[s].class_index;
  rec.sample_seed = plan.sample_seed;
  rec.crop = plan.crop;
  rec.source_box = sample.source_region;
  rec.fallback = plan.fallback;
  return {std::move(rec), std::move(sample)};
}

inline std::size_t resolve_workers(std::size_t hint) {
  if (hint > 0) return hint;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Materialize n * outputs_per_image samples under `out_dir`:
/// images/NNNNNN.png plus manifest.jsonl in ordinal order. Output bytes do not
/// depend on the worker count.
inline RunResult run(const AugmentConfig& cfg, const DatasetIndex& ds, const DetectionMap& dets,
                     const std::filesystem::path& out_dir) {
  validate_config(cfg, ds);
  if (cfg.method == Method::demix) check_detections_match(dets, ds);

  std::error_code ec;
  std::filesystem::create_directories(out_dir / kImagesDir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());

  const std::uint64_t total = ds.size() * cfg.outputs_per_image;
  std::vector<std::optional<AugmentedRecord>> rows(total);
  std::vector<std::string> failures(total);
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> abort{false};

  auto worker = [&] {
    while (!abort.load(std::memory_order_relaxed)) {
      const std::uint64_t o = next.fetch_add(1);
      if (o >= total) return;
      try {
        auto [rec, sample] = augment_one(o, cfg, ds, dets);
        write_png(out_dir / rec.output_path, sample.image);
        rows[o] = std::move(rec);
      } catch (const std::exception& e) {
        failures[o] = e.what();
        abort = true;
      }
    }
  };

  const auto n_workers = std::min<std::uint64_t>(resolve_workers(cfg.workers), std::max<std::uint64_t>(total, 1));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::uint64_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  }

  RunResult result;
  std::vector<std::uint64_t> completed;
  std::string first_failure;
  for (std::uint64_t o = 0; o < total; ++o) {
    if (rows[o]) completed.push_back(o);
    if (first_failure.empty() && !failures[o].empty())
      first_failure = "sample " + std::to_string(o) + ": " + failures[o];
  }
  if (!first_failure.empty()) {
    auto msg = first_failure + " (partial output; completed ordinals: " +
               detail::ordinal_ranges(completed) + ")";
    throw RunError(msg, std::move(completed));
  }

  const auto manifest_path = out_dir / kManifestName;
  std::ofstream manifest(manifest_path, std::ios::binary | std::ios::trunc);
  if (!manifest) throw IoError("cannot write manifest '" + manifest_path.string() + "'");
  result.records.reserve(total);
  for (auto& row : rows) {
    manifest << to_manifest_line(*row) << '\n';
    if (row->fallback) ++result.fallback_count;
    result.records.push_back(std::move(*row));
  }
  manifest.flush();
  if (!manifest) throw IoError("cannot write manifest '" + manifest_path.string() + "'");
  return result;
}

} // namespace demix
