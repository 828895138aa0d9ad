#pragma once

#include <vector>

#include "handpose/grid.hpp"

namespace handpose {

// Isotropic Gaussian blob with peak amplitude 1. The standard deviation is
// given at a reference resolution and scales proportionally with the map
// size, so the blob footprint stays constant relative to the hand.
struct GaussianSpec {
  double sigma = 2.0;
  double reference_resolution = 128.0;

  double sigma_at(double resolution) const { return sigma * resolution / reference_resolution; }
};

// One pyramid level: a K-channel heatmap stack and its fusion weight.
struct PyramidLevel {
  HeatmapStack maps;
  double weight = 1.0;
};

using ScalePyramid = std::vector<PyramidLevel>;

// Gaussian blob centered on the joint; value at (u,v) is
// exp(-((u-x)^2 + (v-y)^2) / (2 sigma^2)) with sigma scaled to the map size.
Heatmap encode_joint(const Keypoint& joint, int width, int height, const GaussianSpec& spec);

// One channel per joint, in joint order.
HeatmapStack encode_joint_set(const JointSet& joints, int width, int height,
                              const GaussianSpec& spec);

// Location of the maximum value; ties resolve to the first pixel in
// row-major scan order.
Keypoint decode_argmax(const Heatmap& map);

// Corner-aligned bilinear interpolation. Output values are convex
// combinations of inputs, so a [0,1] map stays in [0,1].
Heatmap resize_bilinear(const Heatmap& map, int new_width, int new_height);

// Resizes every level to the largest resolution in the pyramid, averages the
// per-channel maps with the level weights, and decodes each fused channel.
JointSet fuse_pyramid(const ScalePyramid& pyramid);

}  // namespace handpose
