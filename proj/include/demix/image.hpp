#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "demix/error.hpp"
#include "demix/geometry.hpp"

namespace demix {

using Rgb = std::array<std::uint8_t, 3>;

/// Row-major W x H x 3 raster of 8-bit sRGB samples.
class ImageBuffer {
public:
  static constexpr int kChannels = 3;

  ImageBuffer() = default;

  explicit ImageBuffer(ImageDims dims, Rgb fill = {0, 0, 0}) : dims_(dims) {
    if (!dims.valid()) throw ContractViolation("image dims must be at least 1x1");
    pixels_.resize(static_cast<std::size_t>(dims.area()) * kChannels);
    for (std::size_t i = 0; i < pixels_.size(); i += kChannels)
      std::copy(fill.begin(), fill.end(), pixels_.begin() + static_cast<std::ptrdiff_t>(i));
  }

  ImageBuffer(ImageDims dims, std::vector<std::uint8_t> pixels)
      : dims_(dims), pixels_(std::move(pixels)) {
    if (!dims.valid()) throw ContractViolation("image dims must be at least 1x1");
    if (pixels_.size() != static_cast<std::size_t>(dims.area()) * kChannels)
      throw ContractViolation("pixel buffer size does not match " + to_string(dims) + "x3");
  }

  const ImageDims& dims() const noexcept { return dims_; }
  int width() const noexcept { return dims_.width; }
  int height() const noexcept { return dims_.height; }

  std::span<const std::uint8_t> bytes() const noexcept { return pixels_; }
  std::span<std::uint8_t> bytes() noexcept { return pixels_; }

  std::uint8_t* pixel(int x, int y) noexcept { return pixels_.data() + offset(x, y); }
  const std::uint8_t* pixel(int x, int y) const noexcept {
    return pixels_.data() + offset(x, y);
  }

  Rgb at(int x, int y) const noexcept {
    const auto* p = pixel(x, y);
    return {p[0], p[1], p[2]};
  }
  void put(int x, int y, const Rgb& c) noexcept {
    auto* p = pixel(x, y);
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(dims_.width) +
            static_cast<std::size_t>(x)) *
           kChannels;
  }

  ImageDims dims_{};
  std::vector<std::uint8_t> pixels_;
};

/// Probability vector over C classes.
class SoftLabel {
public:
  static constexpr double kSumTolerance = 1e-9;

  SoftLabel() = default;
  explicit SoftLabel(std::vector<double> probs) : probs_(std::move(probs)) {}

  static SoftLabel one_hot(std::size_t class_index, std::size_t class_count) {
    if (class_index >= class_count)
      throw ContractViolation("class index " + std::to_string(class_index) +
                              " out of range for " + std::to_string(class_count) +
                              " classes");
    std::vector<double> p(class_count, 0.0);
    p[class_index] = 1.0;
    return SoftLabel(std::move(p));
  }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

  double sum() const noexcept { return std::accumulate(probs_.begin(), probs_.end(), 0.0); }

  bool valid() const noexcept {
    if (probs_.empty()) return false;
    for (double p : probs_)
      if (!(p >= 0.0 && p <= 1.0)) return false;
    return std::abs(sum() - 1.0) <= kSumTolerance;
  }

  friend bool operator==(const SoftLabel&, const SoftLabel&) = default;

private:
  std::vector<double> probs_;
};

/// Label line of the mix: (1 - lambda) * target + lambda * source, entrywise.
inline SoftLabel mix_labels(const SoftLabel& target, const SoftLabel& source, double lambda) {
  if (target.size() != source.size())
    throw ContractViolation("label sizes differ: " + std::to_string(target.size()) + " vs " +
                            std::to_string(source.size()));
  std::vector<double> out(target.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (1.0 - lambda) * target[i] + lambda * source[i];
  return SoftLabel(std::move(out));
}

} // namespace demix
