#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "demix/geometry.hpp"
#include "demix/image.hpp"
#include "demix/resample.hpp"
#include "demix/saliency.hpp"

namespace demix {

enum class Method { demix, cutmix, mixup, cutout, saliencymix, none };

inline std::string_view to_string(Method m) {
  switch (m) {
  case Method::demix: return "demix";
  case Method::cutmix: return "cutmix";
  case Method::mixup: return "mixup";
  case Method::cutout: return "cutout";
  case Method::saliencymix: return "saliencymix";
  case Method::none: return "none";
  }
  return "none";
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (Method m : {Method::demix, Method::cutmix, Method::mixup, Method::cutout,
                   Method::saliencymix, Method::none})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

/// True for strategies that combine two dataset images.
constexpr bool needs_source(Method m) noexcept {
  return m != Method::cutout && m != Method::none;
}

/// Every random decision for one output sample, resolved up front so that
/// composition is a pure function of (plan, inputs).
struct MixPlan {
  Method method = Method::none;
  std::size_t target_index = 0;
  std::size_t source_index = 0;
  double lambda_nominal = 0.0;
  std::optional<PixelBox> crop;        // in target coordinates
  std::optional<PixelBox> source_box;  // demix: selected detection in source coordinates
  std::uint64_t sample_seed = 0;
  bool fallback = false;               // demix found no qualifying detection

  friend bool operator==(const MixPlan&, const MixPlan&) = default;
};

struct MixedSample {
  ImageBuffer image;
  SoftLabel label;
  double lambda_eff = 0.0;
  /// Region of the source actually pasted (demix detection box or the
  /// saliency-centred box), for provenance.
  std::optional<PixelBox> source_region;
};

namespace detail {

inline void require_crop_inside(const MixPlan& plan, const ImageDims& target) {
  if (plan.crop && !plan.crop->inside(target))
    throw ContractViolation("crop " + to_string(*plan.crop) + " lies outside target image " +
                            to_string(target));
}

inline void paste(ImageBuffer& dst, const PixelBox& at, const ImageBuffer& src, int sx0,
                  int sy0) {
  const auto row_bytes = static_cast<std::size_t>(at.w) * ImageBuffer::kChannels;
  for (int y = 0; y < at.h; ++y)
    std::copy_n(src.pixel(sx0, sy0 + y), row_bytes, dst.pixel(at.x0, at.y0 + y));
}

inline MixedSample unchanged(const ImageBuffer& x, const SoftLabel& y) {
  return MixedSample{x, y, 0.0, std::nullopt};
}

} // namespace detail

/// Same-coordinate patch swap. A source of different size is first resampled
/// to the target dimensions.
inline MixedSample cutmix(const ImageBuffer& x_a, const SoftLabel& y_a, const ImageBuffer& x_b,
                          const SoftLabel& y_b, const MixPlan& plan) {
  detail::require_crop_inside(plan, x_a.dims());
  if (!plan.crop) return detail::unchanged(x_a, y_a);

  const ImageBuffer source = resample_to(x_b, x_a.dims());
  ImageBuffer out = x_a;
  detail::paste(out, *plan.crop, source, plan.crop->x0, plan.crop->y0);
  const double lam = effective_lambda(*plan.crop, x_a.dims());
  return MixedSample{std::move(out), mix_labels(y_a, y_b, lam), lam, std::nullopt};
}

/// Detection-guided CutMix: the selected source box is stretched onto the crop
/// of the target. Without a source box this is exactly cutmix.
inline MixedSample demix(const ImageBuffer& x_a, const SoftLabel& y_a, const ImageBuffer& x_b,
                         const SoftLabel& y_b, const MixPlan& plan) {
  detail::require_crop_inside(plan, x_a.dims());
  if (!plan.crop) return detail::unchanged(x_a, y_a);
  if (!plan.source_box) return cutmix(x_a, y_a, x_b, y_b, plan);

  const PixelBox& crop = *plan.crop;
  const ImageBuffer patch = resize_patch(x_b, *plan.source_box, ImageDims{crop.w, crop.h});
  ImageBuffer out = x_a;
  detail::paste(out, crop, patch, 0, 0);
  const double lam = effective_lambda(crop, x_a.dims());
  return MixedSample{std::move(out), mix_labels(y_a, y_b, lam), lam, plan.source_box};
}

/// Pixelwise convex blend weighted by the nominal lambda.
inline MixedSample mixup(const ImageBuffer& x_a, const SoftLabel& y_a, const ImageBuffer& x_b,
                         const SoftLabel& y_b, const MixPlan& plan) {
  const double lam = plan.lambda_nominal;
  if (!(lam >= 0.0 && lam <= 1.0))
    throw ContractViolation("mixup lambda must lie in [0,1]");
  const ImageBuffer source = resample_to(x_b, x_a.dims());
  ImageBuffer out(x_a.dims());
  const auto a = x_a.bytes();
  const auto b = source.bytes();
  auto o = out.bytes();
  for (std::size_t i = 0; i < o.size(); ++i)
    o[i] = static_cast<std::uint8_t>(
        std::clamp<std::int64_t>(round_half_up((1.0 - lam) * a[i] + lam * b[i]), 0, 255));
  return MixedSample{std::move(out), mix_labels(y_a, y_b, lam), lam, std::nullopt};
}

inline constexpr Rgb kCutoutFill{128, 128, 128};

/// Erase the crop with mid-grey. The label is untouched; lambda_eff still
/// reports the erased fraction.
inline MixedSample cutout(const ImageBuffer& x, const SoftLabel& y, const MixPlan& plan) {
  detail::require_crop_inside(plan, x.dims());
  if (!plan.crop) return detail::unchanged(x, y);
  ImageBuffer out = x;
  for (int yy = plan.crop->y0; yy < plan.crop->y1(); ++yy)
    for (int xx = plan.crop->x0; xx < plan.crop->x1(); ++xx) out.put(xx, yy, kCutoutFill);
  return MixedSample{std::move(out), y, effective_lambda(*plan.crop, x.dims()), std::nullopt};
}

/// Paste the crop-sized source region centred on the source's saliency peak.
inline MixedSample saliencymix(const ImageBuffer& x_a, const SoftLabel& y_a,
                               const ImageBuffer& x_b, const SoftLabel& y_b,
                               const MixPlan& plan) {
  detail::require_crop_inside(plan, x_a.dims());
  if (!plan.crop) return detail::unchanged(x_a, y_a);

  const PixelBox& crop = *plan.crop;
  const auto [cx, cy] = argmax(saliency_map(x_b));
  const PixelBox region = centered_box_in_bounds(cx, cy, crop.w, crop.h, x_b.dims());
  ImageBuffer out = x_a;
  detail::paste(out, crop, x_b, region.x0, region.y0);
  const double lam = effective_lambda(crop, x_a.dims());
  return MixedSample{std::move(out), mix_labels(y_a, y_b, lam), lam, region};
}

/// Dispatch on plan.method.
inline MixedSample apply_plan(const MixPlan& plan, const ImageBuffer& x_a, const SoftLabel& y_a,
                              const ImageBuffer& x_b, const SoftLabel& y_b) {
  switch (plan.method) {
  case Method::demix: return demix(x_a, y_a, x_b, y_b, plan);
  case Method::cutmix: return cutmix(x_a, y_a, x_b, y_b, plan);
  case Method::mixup: return mixup(x_a, y_a, x_b, y_b, plan);
  case Method::cutout: return cutout(x_a, y_a, plan);
  case Method::saliencymix: return saliencymix(x_a, y_a, x_b, y_b, plan);
  case Method::none: return detail::unchanged(x_a, y_a);
  }
  throw ContractViolation("unknown method");
}

} // namespace demix
