#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "handpose/heatmap.hpp"
#include "handpose/net.hpp"
#include "handpose/optimizer.hpp"

namespace handpose {

// One example: a network input and a Gaussian target stack per head.
struct TrainingSample {
  Tensor input;                            // (1, C, r, r)
  std::array<Tensor, kHeadCount> targets;  // (1, K, res_h, res_h) each
};

struct TrainConfig {
  int epochs = 30;
  int batch_size = 8;
  std::uint64_t seed = 0;
  AdamConfig adam;
  // Heads that receive supervision; the single-scale variant lists only the
  // last (full-resolution) head.
  std::vector<int> supervised_heads = {0, 1, 2, 3, 4};
  // One delta per supervised head; empty selects the resolution-proportional
  // defaults below.
  std::vector<double> scale_weights;
};

// delta = head resolution / input resolution, so both half-resolution heads
// weigh 1/2 and both full-resolution heads weigh 1.
std::vector<double> default_scale_weights(const NetworkConfig& cfg,
                                          const std::vector<int>& head_indices);

// Stacks the mean-subtracted image planes, appending the raw skeleton plane
// when the config conditions on one. The skeleton is required iff
// cfg.use_skeleton.
Tensor make_network_input(const std::vector<Grid>& image_channels, const SkeletonImage* skeleton,
                          const NetworkConfig& cfg);

// Gaussian target stacks at every head resolution. Joints are given at input
// resolution and rescaled with the same corner-aligned map the fusion resize
// uses, so upsampled targets stay aligned.
std::array<Tensor, kHeadCount> make_head_targets(const JointSet& joints, const NetworkConfig& cfg,
                                                 const GaussianSpec& spec);

struct TrainResult {
  NetworkParams params;
  std::vector<double> epoch_mean_loss;  // mean per-sample loss, one per epoch
};

// Mini-batch gradient descent with Adam and a seeded shuffle; deterministic
// for a fixed seed. Gradients are summed over each batch, matching the
// unnormalized loss definition.
TrainResult train(NetworkParams params, const std::vector<TrainingSample>& dataset,
                  const TrainConfig& cfg);

// Forward pass followed by weighted heatmap fusion of the selected heads.
// Joint coordinates come back at input resolution.
JointSet predict_joints(const NetworkParams& params, const std::vector<Grid>& image_channels,
                        const SkeletonImage* skeleton,
                        const std::vector<int>& head_indices = {0, 1, 2, 3, 4},
                        std::vector<double> fusion_weights = {});

}  // namespace handpose
