#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "handpose/grid.hpp"

namespace handpose {

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // row-major {0,1}

  std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }
};

struct Pixel {
  int x = 0;  // column
  int y = 0;  // row
  friend bool operator==(const Pixel& a, const Pixel& b) { return a.x == b.x && a.y == b.y; }
};

// Connected component, pixels sorted in row-major order.
using Region = std::vector<Pixel>;

struct DetectorThresholds {
  double foreground_threshold = 0.5;  // in (0,1)
  int presence_count = 300;           // >= 1 foreground pixels
};

struct DetectionDecision {
  bool hand_present = false;
  std::int64_t foreground_pixels = 0;
  std::optional<BoundingBox> bbox;  // present iff hand_present
};

// bit = 1 iff value >= threshold.
BinaryMask binarize(const SkeletonImage& img, double foreground_threshold);

// 4-connected foreground components, ordered by their smallest row-major pixel.
std::vector<Region> region_grow(const BinaryMask& mask);

BoundingBox bbox_of_region(const Region& region);

// Hand present iff the total foreground count reaches presence_count; the
// box reported is the largest component's bounds.
DetectionDecision decide_hand_presence(const SkeletonImage& img, const DetectorThresholds& th);

// Affine pixel-coordinate map used by crop_and_resize: crop = scale * (src - offset).
struct CropTransform {
  double scale_x = 1.0;
  double scale_y = 1.0;
  double offset_x = 0.0;
  double offset_y = 0.0;

  Keypoint apply(const Keypoint& p) const {
    return {(p.x - offset_x) * scale_x, (p.y - offset_y) * scale_y};
  }
  Keypoint invert(const Keypoint& p) const {
    return {p.x / scale_x + offset_x, p.y / scale_y + offset_y};
  }
};

struct CropResult {
  std::vector<Grid> channels;
  CropTransform transform;     // source coords -> crop coords
  BoundingBox expanded_box;    // the clamped source window that was resized
};

// Expands the box by margin * max(side) on every side, clamps it to the
// image, and bilinearly resizes the window to out_size x out_size.
CropResult crop_and_resize(const std::vector<Grid>& channels, const BoundingBox& box, int out_size,
                           double margin);

}  // namespace handpose
