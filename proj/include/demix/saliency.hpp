#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "demix/geometry.hpp"
#include "demix/image.hpp"

namespace demix {

/// Non-negative per-pixel score grid, row-major. `raw` keeps the unsmoothed
/// colour distance used to break ties in the smoothed `values`.
struct SaliencyMap {
  ImageDims dims;
  std::vector<double> values;
  std::vector<double> raw;

  double at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * static_cast<std::size_t>(dims.width) +
                  static_cast<std::size_t>(x)];
  }
};

/// Colour-contrast saliency: Euclidean distance of each pixel from the image
/// mean colour, then a 3x3 box mean with edge clamping. Each window is summed
/// in ascending order so windows holding the same values compare exactly equal.
inline SaliencyMap saliency_map(const ImageBuffer& img) {
  const int w = img.width();
  const int h = img.height();
  const auto n = static_cast<std::size_t>(img.dims().area());

  double mean[3] = {0.0, 0.0, 0.0};
  const auto bytes = img.bytes();
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) mean[c] += bytes[i * 3 + static_cast<std::size_t>(c)];
  for (double& m : mean) m /= static_cast<double>(n);

  std::vector<double> raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double d = bytes[i * 3 + static_cast<std::size_t>(c)] - mean[c];
      acc += d * d;
    }
    raw[i] = std::sqrt(acc);
  }

  SaliencyMap out{img.dims(), std::vector<double>(n), {}};
  std::array<double, 9> window{};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::size_t k = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        const int sy = std::clamp(y + dy, 0, h - 1);
        for (int dx = -1; dx <= 1; ++dx) {
          const int sx = std::clamp(x + dx, 0, w - 1);
          window[k++] = raw[static_cast<std::size_t>(sy) * static_cast<std::size_t>(w) +
                            static_cast<std::size_t>(sx)];
        }
      }
      std::sort(window.begin(), window.end());
      double acc = 0.0;
      for (double v : window) acc += v;
      out.values[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                 static_cast<std::size_t>(x)] = acc / 9.0;
    }
  }
  out.raw = std::move(raw);
  return out;
}

/// Position of the smoothed maximum. Ties go to the larger unsmoothed score,
/// then to the lowest row-major index.
inline std::pair<int, int> argmax(const SaliencyMap& map) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < map.values.size(); ++i) {
    const double v = map.values[i];
    const double b = map.values[best];
    if (v > b || (v == b && !map.raw.empty() && map.raw[i] > map.raw[best])) best = i;
  }
  const auto w = static_cast<std::size_t>(map.dims.width);
  return {static_cast<int>(best % w), static_cast<int>(best / w)};
}

/// Box of the given extent centred on (cx, cy), shifted (never shrunk) to lie
/// inside `dims`.
inline PixelBox centered_box_in_bounds(int cx, int cy, int w, int h, const ImageDims& dims) {
  if (w > dims.width || h > dims.height)
    throw ContractViolation("patch extent " + std::to_string(w) + "x" + std::to_string(h) +
                            " exceeds source image " + to_string(dims));
  const int x0 = std::clamp(cx - w / 2, 0, dims.width - w);
  const int y0 = std::clamp(cy - h / 2, 0, dims.height - h);
  return PixelBox{x0, y0, w, h};
}

} // namespace demix
