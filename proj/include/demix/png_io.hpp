#pragma once

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <png.h>

#include "demix/error.hpp"
#include "demix/image.hpp"

namespace demix {

/// Decode any PNG to 8-bit RGB.
inline ImageBuffer read_png(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw IoError("cannot decode image '" + path.string() + "': " + img.message);
  img.format = PNG_FORMAT_RGB;
  const ImageDims dims{static_cast<int>(img.width), static_cast<int>(img.height)};
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, pixels.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw IoError("cannot decode image '" + path.string() + "': " + msg);
  }
  return ImageBuffer(dims, std::move(pixels));
}

/// Encode as 8-bit RGB PNG. Output bytes depend only on the pixels.
inline void write_png(const std::filesystem::path& path, const ImageBuffer& image) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, image.bytes().data(), 0, nullptr))
    throw IoError("cannot write image '" + path.string() + "': " + img.message);
}

} // namespace demix
