#include "handpose/optimizer.hpp"

#include <cmath>
#include <string>

#include "handpose/error.hpp"

namespace handpose {

double AdamConfig::rate_at_epoch(int epoch) const {
  if (decay_every_epochs <= 0) return learning_rate;
  double rate = learning_rate;
  for (int e = decay_every_epochs; e <= epoch; e += decay_every_epochs) rate *= decay_factor;
  return rate;
}

AdamState::AdamState(const std::vector<ParamRef>& params) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const ParamRef& p : params) {
    m_.emplace_back(p.values->size(), 0.0);
    v_.emplace_back(p.values->size(), 0.0);
  }
}

void AdamState::step(const std::vector<ParamRef>& params, const std::vector<ParamRef>& grads,
                     double learning_rate, const AdamConfig& cfg) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ShapeError("AdamState::step: parameter list does not match the state");
  }
  ++t_;
  const double correction1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
  for (std::size_t a = 0; a < params.size(); ++a) {
    std::vector<double>& theta = *params[a].values;
    const std::vector<double>& g = *grads[a].values;
    if (theta.size() != m_[a].size() || g.size() != m_[a].size()) {
      throw ShapeError("AdamState::step: array size mismatch for " + params[a].name);
    }
    for (std::size_t i = 0; i < theta.size(); ++i) {
      if (!std::isfinite(g[i])) {
        throw TrainingError("non-finite gradient in " + params[a].name + " at step " +
                            std::to_string(t_));
      }
      m_[a][i] = cfg.beta1 * m_[a][i] + (1.0 - cfg.beta1) * g[i];
      v_[a][i] = cfg.beta2 * v_[a][i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m_[a][i] / correction1;
      const double v_hat = v_[a][i] / correction2;
      theta[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

}  // namespace handpose
