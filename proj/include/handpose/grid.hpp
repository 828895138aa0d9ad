#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "handpose/error.hpp"

namespace handpose {

// 2D keypoint in pixel units. x is the column, y the row; integer
// coordinates sit on pixel centers. May lie outside the image.
struct Keypoint {
  double x = 0.0;
  double y = 0.0;
};

// Ordered list of K keypoints; ordering matches heatmap channel ordering.
using JointSet = std::vector<Keypoint>;

// Dense row-major scalar field. Used for heatmaps, skeleton images and any
// single-channel plane in the pipeline.
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, double fill = 0.0)
      : width_(width), height_(height), values_(static_cast<std::size_t>(width) * height, fill) {
    if (width < 1 || height < 1) throw InvalidInputError("Grid dimensions must be >= 1");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return values_.empty(); }
  std::size_t size() const { return values_.size(); }

  double& at(int x, int y) { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }

  bool in_bounds(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }
  bool same_shape(const Grid& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

using Heatmap = Grid;
using SkeletonImage = Grid;
using HeatmapStack = std::vector<Heatmap>;

// Axis-aligned box with inclusive integer pixel bounds.
struct BoundingBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const { return x_max - x_min + 1; }
  int height() const { return y_max - y_min + 1; }
  std::int64_t area() const { return static_cast<std::int64_t>(width()) * height(); }
  bool contains(int x, int y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
  bool valid() const { return x_min <= x_max && y_min <= y_max; }

  friend bool operator==(const BoundingBox& a, const BoundingBox& b) {
    return a.x_min == b.x_min && a.y_min == b.y_min && a.x_max == b.x_max && a.y_max == b.y_max;
  }
};

}  // namespace handpose
