#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "demix/error.hpp"

namespace demix {

/// Width and height of an image in pixels; both at least 1.
struct ImageDims {
  int width = 1;
  int height = 1;

  constexpr std::int64_t area() const noexcept {
    return static_cast<std::int64_t>(width) * height;
  }
  constexpr bool valid() const noexcept { return width >= 1 && height >= 1; }

  friend constexpr bool operator==(const ImageDims&, const ImageDims&) = default;
};

/// Axis-aligned pixel rectangle [x0, x0+w) x [y0, y0+h), top-left origin.
struct PixelBox {
  int x0 = 0;
  int y0 = 0;
  int w = 1;
  int h = 1;

  constexpr std::int64_t area() const noexcept {
    return static_cast<std::int64_t>(w) * h;
  }
  constexpr int x1() const noexcept { return x0 + w; }
  constexpr int y1() const noexcept { return y0 + h; }

  constexpr bool inside(const ImageDims& dims) const noexcept {
    return x0 >= 0 && y0 >= 0 && w >= 1 && h >= 1 && x0 + w <= dims.width &&
           y0 + h <= dims.height;
  }
  constexpr bool contains(int x, int y) const noexcept {
    return x >= x0 && x < x1() && y >= y0 && y < y1();
  }

  friend constexpr bool operator==(const PixelBox&, const PixelBox&) = default;
};

inline std::string to_string(const PixelBox& b) {
  return "(" + std::to_string(b.x0) + "," + std::to_string(b.y0) + "," +
         std::to_string(b.w) + "," + std::to_string(b.h) + ")";
}

inline std::string to_string(const ImageDims& d) {
  return std::to_string(d.width) + "x" + std::to_string(d.height);
}

/// Round half-up to the nearest integer: floor(v + 0.5).
inline std::int64_t round_half_up(double v) {
  return static_cast<std::int64_t>(std::floor(v + 0.5));
}

/// Clip a rectangle given by origin and (possibly overhanging) extent to the
/// image. Returns none when nothing of positive area remains.
inline std::optional<PixelBox> clip_to(std::int64_t x, std::int64_t y, std::int64_t w,
                                       std::int64_t h, const ImageDims& dims) {
  const std::int64_t lo_x = std::max<std::int64_t>(x, 0);
  const std::int64_t lo_y = std::max<std::int64_t>(y, 0);
  const std::int64_t hi_x = std::min<std::int64_t>(x + w, dims.width);
  const std::int64_t hi_y = std::min<std::int64_t>(y + h, dims.height);
  if (hi_x <= lo_x || hi_y <= lo_y) return std::nullopt;
  return PixelBox{static_cast<int>(lo_x), static_cast<int>(lo_y),
                  static_cast<int>(hi_x - lo_x), static_cast<int>(hi_y - lo_y)};
}

/// W x H boolean grid, row-major.
class BinaryMask {
public:
  explicit BinaryMask(ImageDims dims)
      : dims_(dims), bits_(static_cast<std::size_t>(dims.area()), 0) {}

  const ImageDims& dims() const noexcept { return dims_; }

  bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool v = true) { bits_[index(x, y)] = v ? 1 : 0; }

  std::int64_t count() const noexcept {
    return std::count(bits_.begin(), bits_.end(), std::uint8_t{1});
  }

private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(dims_.width) +
           static_cast<std::size_t>(x);
  }

  ImageDims dims_;
  std::vector<std::uint8_t> bits_;
};

/// Sample the crop region of the target for mix ratio `lambda`.
///
/// Sides are round_half_up(W*sqrt(lambda)) and round_half_up(H*sqrt(lambda)),
/// so the region keeps the image aspect and its area approximates lambda*W*H.
/// The top-left corner is floor(u_k * (L - side + 1)) per axis, which keeps the
/// box inside the image for every u in [0,1). A zero side yields none.
inline std::optional<PixelBox> crop_box_from_lambda(double lambda, const ImageDims& dims,
                                                    std::array<double, 2> u) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw ContractViolation("lambda must lie in [0,1], got " + std::to_string(lambda));
  if (!dims.valid()) throw ContractViolation("image dims must be at least 1x1");

  const double side = std::sqrt(lambda);
  const auto w = std::min<std::int64_t>(round_half_up(dims.width * side), dims.width);
  const auto h = std::min<std::int64_t>(round_half_up(dims.height * side), dims.height);
  if (w == 0 || h == 0) return std::nullopt;

  auto place = [](double v, std::int64_t slack) {
    v = std::clamp(v, 0.0, 1.0);
    const auto pos = static_cast<std::int64_t>(std::floor(v * static_cast<double>(slack + 1)));
    return static_cast<int>(std::min(pos, slack));
  };
  return PixelBox{place(u[0], dims.width - w), place(u[1], dims.height - h),
                  static_cast<int>(w), static_cast<int>(h)};
}

inline BinaryMask mask_from_box(const PixelBox& box, const ImageDims& dims) {
  if (!box.inside(dims))
    throw ContractViolation("box " + to_string(box) + " lies outside image " +
                            to_string(dims));
  BinaryMask mask(dims);
  for (int y = box.y0; y < box.y1(); ++y)
    for (int x = box.x0; x < box.x1(); ++x) mask.set(x, y);
  return mask;
}

/// Realized area ratio: set bits over W*H.
inline double effective_lambda(const BinaryMask& mask) {
  return static_cast<double>(mask.count()) / static_cast<double>(mask.dims().area());
}

/// Same value as effective_lambda(mask_from_box(box, dims)) without building
/// the mask.
inline double effective_lambda(const PixelBox& box, const ImageDims& dims) {
  return static_cast<double>(box.area()) / static_cast<double>(dims.area());
}

} // namespace demix
