#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "trisdf/common.hpp"

namespace trisdf {

// Row-major RGB image with [0,1] channels.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<real> pixels;  // 3 * width * height

  Image() = default;
  Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(3) * w * h, 0) {}

  real* at(int x, int y) { return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
  const real* at(int x, int y) const {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
};

// 8-bit RGB PNG, non-interlaced. Writes are atomic (temp file +
// rename) and byte-deterministic.
void write_png(const std::filesystem::path& path, const Image& image);
Image read_png(const std::filesystem::path& path);

// Scalar map stored as binary 16-bit PGM, value = round(v * scale)
// clamped to [0, 65535].
void write_pgm16(const std::filesystem::path& path, const std::vector<real>& values,
                 int width, int height, real scale = 10000);

// Mean |a - b| over all channels.
real mean_abs_difference(const Image& a, const Image& b);

}  // namespace trisdf
