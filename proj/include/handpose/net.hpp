#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "handpose/heatmap.hpp"
#include "handpose/layers.hpp"
#include "handpose/tensor.hpp"

namespace handpose {

inline constexpr double kLeakySlope = 0.01;
inline constexpr int kHeadCount = 5;

struct NetworkConfig {
  int image_channels = 3;     // RGB input planes
  bool use_skeleton = true;   // adds one conditioning channel
  int base_channels = 8;
  int joint_count = 21;
  int input_resolution = 128;  // divisible by 4

  int input_channels() const { return image_channels + (use_skeleton ? 1 : 0); }
  void validate() const;
};

// Two 3x3 convolutions with a projected skip; the first convolution carries
// the stride-2 downsampling.
struct DownBlock {
  Conv2D conv1;
  Conv2D conv2;
  Conv2D skip;
};

// Stride-2 transposed convolution, then a 3x3 convolution, with a stride-2
// transposed projection on the skip path.
struct UpBlock {
  TConv2D up;
  Conv2D conv2;
  TConv2D skip;
};

struct NetworkParams {
  NetworkConfig config;
  Conv2D stem;
  DownBlock down1;
  DownBlock down2;
  UpBlock up1;
  UpBlock up2;
  TConv2D final_up;                  // stride 1, keeps the full resolution
  std::array<Conv2D, kHeadCount> heads;  // 1x1 convs, one K-channel stack each
};

struct ParamRef {
  std::string name;
  std::vector<double>* values;
};

// Stable parameter ordering shared by the optimizer and the checkpoint format.
std::vector<ParamRef> parameter_arrays(NetworkParams& params);

NetworkParams build_network(const NetworkConfig& cfg, std::uint64_t seed);
// Same layer shapes as `like`, every value zero; used as a gradient holder.
NetworkParams zeros_like(const NetworkParams& like);

// Head output resolutions: r/2, r/4, r/2, r, r.
std::array<int, kHeadCount> head_resolutions(const NetworkConfig& cfg);

// Cached activations for the backward pass.
struct ForwardTrace {
  Tensor input;
  Tensor stem_pre, stem_out;
  struct BlockTrace {
    Tensor pre1, act1, sum, out;
  };
  BlockTrace down1, down2, up1, up2;
  Tensor final_pre, final_out;
  std::array<Tensor, kHeadCount> head_out;  // sigmoid outputs
  bool filled = false;
};

// Runs the trunk and the five sigmoid heads. All outputs lie in (0,1).
std::array<Tensor, kHeadCount> forward(const NetworkParams& params, const Tensor& input,
                                       ForwardTrace* trace = nullptr);

// Reverse-mode pass; head gradients are d(loss)/d(head output). Gradients of
// all heads accumulate along the shared trunk.
NetworkParams backward(const NetworkParams& params, const ForwardTrace& trace,
                       const std::array<Tensor, kHeadCount>& head_gradients);

void save_checkpoint(const NetworkParams& params, const std::string& path);
NetworkParams load_checkpoint(const std::string& path);

// Slices sample n of each selected head into a weighted pyramid for fusion.
ScalePyramid heads_to_pyramid(const std::array<Tensor, kHeadCount>& head_outputs,
                              const std::vector<int>& head_indices,
                              const std::vector<double>& weights, int sample);

}  // namespace handpose
