#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "handpose/grid.hpp"

namespace handpose {

// 8-bit raster, channels interleaved row-major. 1 channel maps to PGM (P5),
// 3 channels to PPM (P6).
struct ImageBuffer {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> samples;

  std::uint8_t at(int x, int y, int c) const {
    return samples[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t& at(int x, int y, int c) {
    return samples[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

// Binary netpbm only (P5 graymap, P6 pixmap), maxval 255, strict grammar:
// bad magic, malformed header, short raster or trailing bytes all raise a
// format error. Write-then-read is byte-exact.
ImageBuffer read_image(const std::string& path);
void write_image(const ImageBuffer& image, const std::string& path);

// 8-bit samples scaled to [0,1] planes, one per channel, and back. Plane
// values are clamped to [0,1] before rounding.
std::vector<Grid> to_planes(const ImageBuffer& image);
ImageBuffer from_planes(const std::vector<Grid>& planes);

}  // namespace handpose
