#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "demix/geometry.hpp"
#include "demix/image.hpp"

namespace demix {

namespace detail {

// Per-axis sampling coefficients for half-pixel-centre bilinear resampling.
struct AxisTap {
  int lo;
  int hi;
  double frac;
};

inline std::vector<AxisTap> axis_taps(int src_len, int out_len) {
  std::vector<AxisTap> taps(static_cast<std::size_t>(out_len));
  const double scale = static_cast<double>(src_len) / static_cast<double>(out_len);
  for (int d = 0; d < out_len; ++d) {
    double s = (d + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src_len - 1));
    const int lo = static_cast<int>(std::floor(s));
    taps[static_cast<std::size_t>(d)] = {lo, std::min(lo + 1, src_len - 1), s - lo};
  }
  return taps;
}

} // namespace detail

/// Bilinear resize of the `box` region of `src` to `out_dims`.
///
/// Output pixel d samples source coordinate (d + 0.5) * (src_len / out_len) - 0.5
/// per axis, clamped to [0, src_len - 1]. Each channel is
///   (1-fy)*((1-fx)*p00 + fx*p10) + fy*((1-fx)*p01 + fx*p11)
/// rounded half-up. An output the size of the box is a byte copy.
inline ImageBuffer resize_patch(const ImageBuffer& src, const PixelBox& box,
                                const ImageDims& out_dims) {
  if (!box.inside(src.dims()))
    throw ContractViolation("patch box " + to_string(box) + " lies outside source image " +
                            to_string(src.dims()));
  if (!out_dims.valid()) throw ContractViolation("resize target must be at least 1x1");

  ImageBuffer out(out_dims);
  if (out_dims.width == box.w && out_dims.height == box.h) {
    const auto row_bytes = static_cast<std::size_t>(box.w) * ImageBuffer::kChannels;
    for (int y = 0; y < box.h; ++y)
      std::copy_n(src.pixel(box.x0, box.y0 + y), row_bytes, out.pixel(0, y));
    return out;
  }

  const auto xs = detail::axis_taps(box.w, out_dims.width);
  const auto ys = detail::axis_taps(box.h, out_dims.height);
  for (int oy = 0; oy < out_dims.height; ++oy) {
    const auto& ty = ys[static_cast<std::size_t>(oy)];
    const std::uint8_t* row0 = src.pixel(box.x0, box.y0 + ty.lo);
    const std::uint8_t* row1 = src.pixel(box.x0, box.y0 + ty.hi);
    std::uint8_t* dst = out.pixel(0, oy);
    for (int ox = 0; ox < out_dims.width; ++ox) {
      const auto& tx = xs[static_cast<std::size_t>(ox)];
      const std::uint8_t* p00 = row0 + tx.lo * ImageBuffer::kChannels;
      const std::uint8_t* p10 = row0 + tx.hi * ImageBuffer::kChannels;
      const std::uint8_t* p01 = row1 + tx.lo * ImageBuffer::kChannels;
      const std::uint8_t* p11 = row1 + tx.hi * ImageBuffer::kChannels;
      for (int c = 0; c < ImageBuffer::kChannels; ++c) {
        const double top = (1.0 - tx.frac) * p00[c] + tx.frac * p10[c];
        const double bottom = (1.0 - tx.frac) * p01[c] + tx.frac * p11[c];
        const double v = (1.0 - ty.frac) * top + ty.frac * bottom;
        dst[c] = static_cast<std::uint8_t>(std::clamp<std::int64_t>(round_half_up(v), 0, 255));
      }
      dst += ImageBuffer::kChannels;
    }
  }
  return out;
}

/// Whole-image resample with the same kernel; identity when dims already match.
inline ImageBuffer resample_to(const ImageBuffer& src, const ImageDims& out_dims) {
  if (src.dims() == out_dims) return src;
  return resize_patch(src, PixelBox{0, 0, src.width(), src.height()}, out_dims);
}

} // namespace demix
