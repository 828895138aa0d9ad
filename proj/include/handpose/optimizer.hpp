#pragma once

#include <vector>

#include "handpose/net.hpp"

namespace handpose {

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double decay_factor = 0.9;   // multiplies the rate every decay_every_epochs
  int decay_every_epochs = 8;  // 0 disables the schedule

  // Scheduled rate for a 0-based epoch index.
  double rate_at_epoch(int epoch) const;
};

// First/second moment accumulators, one pair per parameter array, in the
// stable parameter_arrays ordering.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(const std::vector<ParamRef>& params);

  // One bias-corrected update in place. grads must follow the same ordering
  // the state was built from.
  void step(const std::vector<ParamRef>& params, const std::vector<ParamRef>& grads,
            double learning_rate, const AdamConfig& cfg);

  long steps_taken() const { return t_; }

 private:
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  long t_ = 0;
};

}  // namespace handpose
