#include "handpose/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "handpose/error.hpp"

namespace handpose {

Heatmap encode_joint(const Keypoint& joint, int width, int height, const GaussianSpec& spec) {
  if (!std::isfinite(joint.x) || !std::isfinite(joint.y)) {
    throw InvalidInputError("encode_joint: joint coordinates must be finite");
  }
  if (width < 1 || height < 1) throw InvalidInputError("encode_joint: dimensions must be >= 1");
  if (!(spec.sigma > 0.0) || !(spec.reference_resolution > 0.0)) {
    throw InvalidInputError("encode_joint: invalid GaussianSpec");
  }

  const double sigma = spec.sigma_at(static_cast<double>(std::max(width, height)));
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);

  Heatmap map(width, height);
  for (int y = 0; y < height; ++y) {
    const double dy = y - joint.y;
    for (int x = 0; x < width; ++x) {
      const double dx = x - joint.x;
      map.at(x, y) = std::exp(-(dx * dx + dy * dy) * inv_two_sigma_sq);
    }
  }
  return map;
}

HeatmapStack encode_joint_set(const JointSet& joints, int width, int height,
                              const GaussianSpec& spec) {
  HeatmapStack stack;
  stack.reserve(joints.size());
  for (std::size_t k = 0; k < joints.size(); ++k) {
    try {
      stack.push_back(encode_joint(joints[k], width, height, spec));
    } catch (const InvalidInputError& err) {
      throw InvalidInputError("channel " + std::to_string(k) + ": " + err.what());
    }
  }
  return stack;
}

Keypoint decode_argmax(const Heatmap& map) {
  if (map.empty()) throw InvalidInputError("decode_argmax: empty heatmap");
  int best_x = 0;
  int best_y = 0;
  double best = map.at(0, 0);
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const double v = map.at(x, y);
      if (v > best) {
        best = v;
        best_x = x;
        best_y = y;
      }
    }
  }
  return {static_cast<double>(best_x), static_cast<double>(best_y)};
}

namespace {

// Corner-aligned source coordinate for output index i.
double sample_coord(int i, int in_extent, int out_extent) {
  if (out_extent <= 1 || in_extent <= 1) return 0.0;
  return static_cast<double>(i) * (in_extent - 1) / (out_extent - 1);
}

}  // namespace

Heatmap resize_bilinear(const Heatmap& map, int new_width, int new_height) {
  if (map.empty()) throw InvalidInputError("resize_bilinear: empty heatmap");
  if (new_width < 1 || new_height < 1) {
    throw InvalidInputError("resize_bilinear: target dimensions must be >= 1");
  }
  Heatmap out(new_width, new_height);
  for (int y = 0; y < new_height; ++y) {
    const double sy = sample_coord(y, map.height(), new_height);
    const int y0 = static_cast<int>(sy);
    const int y1 = std::min(y0 + 1, map.height() - 1);
    const double fy = sy - y0;
    for (int x = 0; x < new_width; ++x) {
      const double sx = sample_coord(x, map.width(), new_width);
      const int x0 = static_cast<int>(sx);
      const int x1 = std::min(x0 + 1, map.width() - 1);
      const double fx = sx - x0;
      const double top = map.at(x0, y0) * (1.0 - fx) + map.at(x1, y0) * fx;
      const double bottom = map.at(x0, y1) * (1.0 - fx) + map.at(x1, y1) * fx;
      out.at(x, y) = top * (1.0 - fy) + bottom * fy;
    }
  }
  return out;
}

JointSet fuse_pyramid(const ScalePyramid& pyramid) {
  if (pyramid.empty()) throw InvalidInputError("fuse_pyramid: empty pyramid");
  const std::size_t channels = pyramid.front().maps.size();
  if (channels == 0) throw InvalidInputError("fuse_pyramid: level has no channels");

  int max_w = 0;
  int max_h = 0;
  double weight_sum = 0.0;
  for (const PyramidLevel& level : pyramid) {
    if (level.maps.size() != channels) {
      throw ShapeError("fuse_pyramid: mismatched channel count across levels");
    }
    if (!(level.weight > 0.0)) throw InvalidInputError("fuse_pyramid: weights must be > 0");
    max_w = std::max(max_w, level.maps.front().width());
    max_h = std::max(max_h, level.maps.front().height());
    weight_sum += level.weight;
  }

  JointSet joints(channels);
  for (std::size_t k = 0; k < channels; ++k) {
    Heatmap fused(max_w, max_h, 0.0);
    for (const PyramidLevel& level : pyramid) {
      const Heatmap& src = level.maps[k];
      const Heatmap resized = (src.width() == max_w && src.height() == max_h)
                                  ? src
                                  : resize_bilinear(src, max_w, max_h);
      const double w = level.weight / weight_sum;
      for (std::size_t i = 0; i < fused.size(); ++i) fused.values()[i] += w * resized.values()[i];
    }
    joints[k] = decode_argmax(fused);
  }
  return joints;
}

}  // namespace handpose
