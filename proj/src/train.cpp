#include "handpose/train.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>

#include "handpose/error.hpp"
#include "handpose/losses.hpp"
#include "handpose/rng.hpp"

namespace handpose {

std::vector<double> default_scale_weights(const NetworkConfig& cfg,
                                          const std::vector<int>& head_indices) {
  const std::array<int, kHeadCount> res = head_resolutions(cfg);
  std::vector<double> weights;
  weights.reserve(head_indices.size());
  for (int h : head_indices) {
    if (h < 0 || h >= kHeadCount) throw InvalidInputError("bad head index");
    weights.push_back(static_cast<double>(res[h]) / cfg.input_resolution);
  }
  return weights;
}

Tensor make_network_input(const std::vector<Grid>& image_channels, const SkeletonImage* skeleton,
                          const NetworkConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(image_channels.size()) != cfg.image_channels) {
    throw ShapeError("make_network_input: expected " + std::to_string(cfg.image_channels) +
                     " image channels, got " + std::to_string(image_channels.size()));
  }
  if (cfg.use_skeleton && skeleton == nullptr) {
    throw InvalidInputError("make_network_input: skeleton conditioning input required");
  }
  if (!cfg.use_skeleton && skeleton != nullptr) {
    throw InvalidInputError("make_network_input: network takes no skeleton input");
  }
  const int r = cfg.input_resolution;
  for (const Grid& plane : image_channels) {
    if (plane.width() != r || plane.height() != r) {
      throw ShapeError("make_network_input: image plane resolution mismatch");
    }
  }
  if (skeleton && (skeleton->width() != r || skeleton->height() != r)) {
    throw ShapeError("make_network_input: skeleton resolution mismatch");
  }

  double mean = 0.0;
  for (const Grid& plane : image_channels) {
    for (double v : plane.values()) mean += v;
  }
  mean /= static_cast<double>(image_channels.size()) * r * r;

  Tensor input(1, cfg.input_channels(), r, r);
  for (std::size_t c = 0; c < image_channels.size(); ++c) {
    for (int y = 0; y < r; ++y) {
      for (int x = 0; x < r; ++x) {
        input.at(0, static_cast<int>(c), y, x) = image_channels[c].at(x, y) - mean;
      }
    }
  }
  if (skeleton) {
    const int c = cfg.image_channels;
    for (int y = 0; y < r; ++y) {
      for (int x = 0; x < r; ++x) input.at(0, c, y, x) = skeleton->at(x, y);
    }
  }
  return input;
}

std::array<Tensor, kHeadCount> make_head_targets(const JointSet& joints, const NetworkConfig& cfg,
                                                 const GaussianSpec& spec) {
  cfg.validate();
  if (static_cast<int>(joints.size()) != cfg.joint_count) {
    throw ShapeError("make_head_targets: joint count mismatch");
  }
  const int r = cfg.input_resolution;
  const std::array<int, kHeadCount> res = head_resolutions(cfg);
  std::array<Tensor, kHeadCount> targets;
  for (int h = 0; h < kHeadCount; ++h) {
    const double factor =
        res[h] > 1 ? static_cast<double>(res[h] - 1) / static_cast<double>(r - 1) : 0.0;
    JointSet scaled;
    scaled.reserve(joints.size());
    for (const Keypoint& j : joints) scaled.push_back({j.x * factor, j.y * factor});
    targets[h] = Tensor::from_planes(encode_joint_set(scaled, res[h], res[h], spec));
  }
  return targets;
}

namespace {

void validate_supervision(const TrainConfig& cfg) {
  if (cfg.supervised_heads.empty()) {
    throw InvalidInputError("train: at least one supervised head required");
  }
  bool seen[kHeadCount] = {};
  for (int h : cfg.supervised_heads) {
    if (h < 0 || h >= kHeadCount) throw InvalidInputError("train: bad head index");
    if (seen[h]) throw InvalidInputError("train: duplicate supervised head");
    seen[h] = true;
  }
  if (!cfg.scale_weights.empty() && cfg.scale_weights.size() != cfg.supervised_heads.size()) {
    throw InvalidInputError("train: one scale weight per supervised head required");
  }
}

void accumulate(std::vector<ParamRef>& acc, NetworkParams& grads) {
  const std::vector<ParamRef> g = parameter_arrays(grads);
  for (std::size_t a = 0; a < acc.size(); ++a) {
    std::vector<double>& dst = *acc[a].values;
    const std::vector<double>& src = *g[a].values;
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
}

}  // namespace

TrainResult train(NetworkParams params, const std::vector<TrainingSample>& dataset,
                  const TrainConfig& cfg) {
  if (dataset.empty()) throw InvalidInputError("train: empty dataset");
  if (cfg.epochs < 0) throw InvalidInputError("train: epochs must be >= 0");
  if (cfg.batch_size < 1) throw InvalidInputError("train: batch_size must be >= 1");
  validate_supervision(cfg);

  const std::vector<double> weights = cfg.scale_weights.empty()
                                          ? default_scale_weights(params.config, cfg.supervised_heads)
                                          : cfg.scale_weights;
  const MultiScaleLossConfig loss_cfg{weights};

  TrainResult result;
  result.params = std::move(params);
  std::vector<ParamRef> param_refs = parameter_arrays(result.params);
  AdamState adam(param_refs);

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(cfg.seed);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    const double rate = cfg.adam.rate_at_epoch(epoch);
    double epoch_loss = 0.0;

    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      NetworkParams grad_acc = zeros_like(result.params);
      std::vector<ParamRef> grad_refs = parameter_arrays(grad_acc);

      for (std::size_t s = begin; s < end; ++s) {
        const TrainingSample& sample = dataset[order[s]];
        ForwardTrace trace;
        const std::array<Tensor, kHeadCount> outputs = forward(result.params, sample.input, &trace);

        std::vector<Tensor> sup_targets;
        std::vector<Tensor> sup_preds;
        sup_targets.reserve(cfg.supervised_heads.size());
        sup_preds.reserve(cfg.supervised_heads.size());
        for (int h : cfg.supervised_heads) {
          sup_targets.push_back(sample.targets[h]);
          sup_preds.push_back(outputs[h]);
        }
        MultiScaleLossResult loss = multi_scale_loss(sup_targets, sup_preds, loss_cfg);
        epoch_loss += loss.value;

        std::array<Tensor, kHeadCount> head_grads;
        for (int h = 0; h < kHeadCount; ++h) head_grads[h] = Tensor::zeros_like(outputs[h]);
        for (std::size_t i = 0; i < cfg.supervised_heads.size(); ++i) {
          head_grads[cfg.supervised_heads[i]] = std::move(loss.gradients[i]);
        }
        NetworkParams sample_grads = backward(result.params, trace, head_grads);
        accumulate(grad_refs, sample_grads);
      }

      adam.step(param_refs, grad_refs, rate, cfg.adam);
    }

    result.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(dataset.size()));
  }
  return result;
}

JointSet predict_joints(const NetworkParams& params, const std::vector<Grid>& image_channels,
                        const SkeletonImage* skeleton, const std::vector<int>& head_indices,
                        std::vector<double> fusion_weights) {
  if (fusion_weights.empty()) {
    fusion_weights = default_scale_weights(params.config, head_indices);
  } else if (fusion_weights.size() != head_indices.size()) {
    throw InvalidInputError("predict_joints: one fusion weight per head required");
  }
  const Tensor input = make_network_input(image_channels, skeleton, params.config);
  const std::array<Tensor, kHeadCount> outputs = forward(params, input);
  const ScalePyramid pyramid = heads_to_pyramid(outputs, head_indices, fusion_weights, 0);

  JointSet joints = fuse_pyramid(pyramid);

  // Fusion decodes at the largest selected head resolution; rescale to the
  // input frame when every selected head is a downsampled one.
  int max_res = 0;
  const std::array<int, kHeadCount> res = head_resolutions(params.config);
  for (int h : head_indices) max_res = std::max(max_res, res[h]);
  if (max_res != params.config.input_resolution && max_res > 1) {
    const double factor = static_cast<double>(params.config.input_resolution - 1) /
                          static_cast<double>(max_res - 1);
    for (Keypoint& j : joints) {
      j.x *= factor;
      j.y *= factor;
    }
  }
  return joints;
}

}  // namespace handpose
