#include "handpose/losses.hpp"

#include <cmath>
#include <string>

#include "handpose/error.hpp"

namespace handpose {

LossResult l1_loss(std::span<const double> target, std::span<const double> pred) {
  if (target.size() != pred.size()) throw ShapeError("l1_loss: shape mismatch");
  LossResult result;
  result.gradient.resize(pred.size(), 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double diff = target[i] - pred[i];
    result.value += std::abs(diff);
    result.gradient[i] = diff > 0.0 ? -1.0 : (diff < 0.0 ? 1.0 : 0.0);
  }
  return result;
}

LossResult soft_dice_loss(std::span<const double> target, std::span<const double> pred) {
  if (target.size() != pred.size()) throw ShapeError("soft_dice_loss: shape mismatch");
  double dot = 0.0;
  double norm_pred = 0.0;
  double norm_target = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    dot += pred[i] * target[i];
    norm_pred += pred[i] * pred[i];
    norm_target += target[i] * target[i];
  }
  LossResult result;
  result.gradient.resize(pred.size(), 0.0);
  const double denom = norm_pred + norm_target;
  if (denom == 0.0) return result;  // two empty masks match perfectly

  result.value = 1.0 - 2.0 * dot / denom;
  const double denom_sq = denom * denom;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    result.gradient[i] = -(2.0 * target[i] * denom - 4.0 * pred[i] * dot) / denom_sq;
  }
  return result;
}

LossResult combined_loss(std::span<const double> target, std::span<const double> pred,
                         const CombinedLossConfig& cfg) {
  if (cfg.lambda1 < 0.0 || cfg.lambda2 < 0.0 || (cfg.lambda1 == 0.0 && cfg.lambda2 == 0.0)) {
    throw InvalidInputError("combined_loss: weights must be >= 0 and not both zero");
  }
  const LossResult l1 = l1_loss(target, pred);
  const LossResult dice = soft_dice_loss(target, pred);
  LossResult result;
  result.value = cfg.lambda1 * l1.value + cfg.lambda2 * dice.value;
  result.gradient.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    result.gradient[i] = cfg.lambda1 * l1.gradient[i] + cfg.lambda2 * dice.gradient[i];
  }
  return result;
}

namespace {

std::span<const double> flat(const Grid& g) { return {g.values().data(), g.values().size()}; }

void check_grid_shapes(const Grid& target, const Grid& pred, const char* op) {
  if (!target.same_shape(pred)) throw ShapeError(std::string(op) + ": shape mismatch");
}

}  // namespace

LossResult l1_loss(const Grid& target, const Grid& pred) {
  check_grid_shapes(target, pred, "l1_loss");
  return l1_loss(flat(target), flat(pred));
}

LossResult soft_dice_loss(const Grid& target, const Grid& pred) {
  check_grid_shapes(target, pred, "soft_dice_loss");
  return soft_dice_loss(flat(target), flat(pred));
}

LossResult combined_loss(const Grid& target, const Grid& pred, const CombinedLossConfig& cfg) {
  check_grid_shapes(target, pred, "combined_loss");
  return combined_loss(flat(target), flat(pred), cfg);
}

MultiScaleLossResult multi_scale_loss(const std::vector<Tensor>& targets,
                                      const std::vector<Tensor>& preds,
                                      const MultiScaleLossConfig& cfg) {
  if (targets.size() != preds.size() || preds.size() != cfg.weights.size() || preds.empty()) {
    throw ShapeError("multi_scale_loss: level count mismatch");
  }
  MultiScaleLossResult result;
  result.gradients.reserve(preds.size());
  for (std::size_t level = 0; level < preds.size(); ++level) {
    const double w = cfg.weights[level];
    if (!(w > 0.0)) throw InvalidInputError("multi_scale_loss: weights must be > 0");
    if (!targets[level].same_shape(preds[level])) {
      throw ShapeError("multi_scale_loss: shape mismatch at level " + std::to_string(level));
    }
    Tensor grad = Tensor::zeros_like(preds[level]);
    const std::vector<double>& t = targets[level].data();
    const std::vector<double>& p = preds[level].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double diff = t[i] - p[i];
      result.value += w * diff * diff;
      grad.data()[i] = -2.0 * w * diff;
    }
    result.gradients.push_back(std::move(grad));
  }
  return result;
}

}  // namespace handpose
