#pragma once

#include <span>
#include <vector>

#include "handpose/grid.hpp"
#include "handpose/tensor.hpp"

namespace handpose {

// Scalar loss plus its gradient with respect to the prediction.
struct LossResult {
  double value = 0.0;
  std::vector<double> gradient;
};

struct CombinedLossConfig {
  double lambda1 = 0.4;  // L1 weight
  double lambda2 = 0.6;  // SoftDice weight
};

struct MultiScaleLossConfig {
  std::vector<double> weights;  // one per supervised output, all > 0
};

// Sum of absolute differences (unnormalized). Subgradient at zero is zero.
LossResult l1_loss(std::span<const double> target, std::span<const double> pred);

// 1 - 2<pred,target> / (|pred|^2 + |target|^2). Two empty masks compare as a
// perfect match (loss 0, zero gradient).
LossResult soft_dice_loss(std::span<const double> target, std::span<const double> pred);

LossResult combined_loss(std::span<const double> target, std::span<const double> pred,
                         const CombinedLossConfig& cfg);

LossResult l1_loss(const Grid& target, const Grid& pred);
LossResult soft_dice_loss(const Grid& target, const Grid& pred);
LossResult combined_loss(const Grid& target, const Grid& pred, const CombinedLossConfig& cfg);

// Weighted sum over scales of the squared L2 difference, with per-level
// gradients 2 * w_i * (pred_i - target_i).
struct MultiScaleLossResult {
  double value = 0.0;
  std::vector<Tensor> gradients;  // per level, shaped like the predictions
};

MultiScaleLossResult multi_scale_loss(const std::vector<Tensor>& targets,
                                      const std::vector<Tensor>& preds,
                                      const MultiScaleLossConfig& cfg);

}  // namespace handpose
