#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "demix/error.hpp"
#include "demix/geometry.hpp"

namespace demix {

struct ScoredBox {
  PixelBox box;
  double score = 0.0;
  std::string class_tag;  // passed through, never interpreted

  friend bool operator==(const ScoredBox&, const ScoredBox&) = default;
};

/// Detections for one image, in file order, already clipped to the image.
struct DetectionSet {
  std::string image_key;
  ImageDims dims;
  std::vector<ScoredBox> boxes;

  friend bool operator==(const DetectionSet&, const DetectionSet&) = default;
};

using DetectionMap = std::map<std::string, DetectionSet, std::less<>>;

enum class BoxSelectMode { max_score, max_area, random_above_threshold };

inline std::string_view to_string(BoxSelectMode m) {
  switch (m) {
  case BoxSelectMode::max_score: return "max-score";
  case BoxSelectMode::max_area: return "max-area";
  case BoxSelectMode::random_above_threshold: return "random";
  }
  return "max-score";
}

inline std::optional<BoxSelectMode> parse_box_select_mode(std::string_view s) {
  if (s == "max-score") return BoxSelectMode::max_score;
  if (s == "max-area") return BoxSelectMode::max_area;
  if (s == "random" || s == "random-above-threshold") return BoxSelectMode::random_above_threshold;
  return std::nullopt;
}

struct BoxSelectPolicy {
  BoxSelectMode mode = BoxSelectMode::max_score;
  double threshold = 0.7;
};

namespace detail {

inline std::string record_name(std::size_t image, std::string_view file) {
  return "images[" + std::to_string(image) + "] (file '" + std::string(file) + "')";
}

inline std::string record_name(std::size_t image, std::string_view file, std::size_t det) {
  return "images[" + std::to_string(image) + "].detections[" + std::to_string(det) +
         "] (file '" + std::string(file) + "')";
}

template <class T>
T require_field(const nlohmann::json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(where + ": missing field '" + key + "'");
  if constexpr (std::is_same_v<T, std::string>) {
    if (!it->is_string()) throw ValidationError(where + ": field '" + key + "' must be a string");
  } else if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_integer())
      throw ValidationError(where + ": field '" + key + "' must be an integer");
  } else {
    if (!it->is_number()) throw ValidationError(where + ": field '" + key + "' must be a number");
  }
  return it->get<T>();
}

} // namespace detail

/// Parse a detections sidecar document.
///
///   { "images": [ { "file": "a.png", "width": W, "height": H,
///                   "detections": [ { "x": 1, "y": 2, "w": 3, "h": 4,
///                                     "score": 0.9, "class": "bird" } ] } ] }
///
/// Boxes are clipped to their image and dropped when nothing remains.
/// Throws ParseError (with byte offset) on malformed text and ValidationError
/// naming the offending record on out-of-range content.
inline DetectionMap parse_sidecar(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("sidecar parse error at byte " + std::to_string(e.byte) + ": " + e.what(),
                     e.byte);
  }
  if (!doc.is_object()) throw ValidationError("sidecar root must be an object");
  const auto images = doc.find("images");
  if (images == doc.end() || !images->is_array())
    throw ValidationError("sidecar root must contain an 'images' array");

  DetectionMap out;
  for (std::size_t i = 0; i < images->size(); ++i) {
    const auto& entry = (*images)[i];
    const std::string where_img = "images[" + std::to_string(i) + "]";
    if (!entry.is_object()) throw ValidationError(where_img + ": must be an object");
    DetectionSet set;
    set.image_key = detail::require_field<std::string>(entry, "file", where_img);
    const auto rec = detail::record_name(i, set.image_key);
    set.dims.width = detail::require_field<int>(entry, "width", rec);
    set.dims.height = detail::require_field<int>(entry, "height", rec);
    if (!set.dims.valid()) throw ValidationError(rec + ": width and height must be >= 1");

    const auto dets = entry.find("detections");
    if (dets == entry.end() || !dets->is_array())
      throw ValidationError(rec + ": missing 'detections' array");
    for (std::size_t j = 0; j < dets->size(); ++j) {
      const auto& d = (*dets)[j];
      const auto drec = detail::record_name(i, set.image_key, j);
      if (!d.is_object()) throw ValidationError(drec + ": must be an object");
      const auto x = detail::require_field<std::int64_t>(d, "x", drec);
      const auto y = detail::require_field<std::int64_t>(d, "y", drec);
      const auto w = detail::require_field<std::int64_t>(d, "w", drec);
      const auto h = detail::require_field<std::int64_t>(d, "h", drec);
      const auto score = detail::require_field<double>(d, "score", drec);
      if (w < 0 || h < 0) throw ValidationError(drec + ": negative box extent");
      if (!(score >= 0.0 && score <= 1.0))
        throw ValidationError(drec + ": score " + std::to_string(score) + " outside [0,1]");
      std::string tag;
      if (const auto c = d.find("class"); c != d.end()) {
        if (!c->is_string()) throw ValidationError(drec + ": field 'class' must be a string");
        tag = c->get<std::string>();
      }
      if (auto clipped = clip_to(x, y, w, h, set.dims))
        set.boxes.push_back(ScoredBox{*clipped, score, std::move(tag)});
    }
    auto key = set.image_key;
    if (!out.emplace(std::move(key), std::move(set)).second)
      throw ValidationError(rec + ": duplicate image entry");
  }
  return out;
}

/// Inverse of parse_sidecar for already-clipped detections (images sorted by key).
inline std::string serialize_sidecar(const DetectionMap& map) {
  nlohmann::json images = nlohmann::json::array();
  for (const auto& [key, set] : map) {
    nlohmann::json dets = nlohmann::json::array();
    for (const auto& b : set.boxes)
      dets.push_back({{"x", b.box.x0},
                      {"y", b.box.y0},
                      {"w", b.box.w},
                      {"h", b.box.h},
                      {"score", b.score},
                      {"class", b.class_tag}});
    images.push_back({{"file", key},
                      {"width", set.dims.width},
                      {"height", set.dims.height},
                      {"detections", std::move(dets)}});
  }
  return nlohmann::json{{"images", std::move(images)}}.dump(2);
}

/// Pick the detection defining the source patch, or none when no box reaches
/// the threshold. `u` is consumed only by the random mode.
inline std::optional<ScoredBox> select_box(const DetectionSet& dets, const BoxSelectPolicy& policy,
                                           double u) {
  std::vector<const ScoredBox*> candidates;
  for (const auto& b : dets.boxes)
    if (b.score >= policy.threshold) candidates.push_back(&b);
  if (candidates.empty()) return std::nullopt;

  const ScoredBox* best = candidates.front();
  switch (policy.mode) {
  case BoxSelectMode::max_score:
    for (const auto* c : candidates)
      if (c->score > best->score) best = c;
    break;
  case BoxSelectMode::max_area:
    for (const auto* c : candidates)
      if (c->box.area() > best->box.area()) best = c;
    break;
  case BoxSelectMode::random_above_threshold: {
    const auto n = candidates.size();
    auto idx = static_cast<std::size_t>(std::floor(std::clamp(u, 0.0, 1.0) * static_cast<double>(n)));
    best = candidates[std::min(idx, n - 1)];
    break;
  }
  }
  return *best;
}

} // namespace demix
