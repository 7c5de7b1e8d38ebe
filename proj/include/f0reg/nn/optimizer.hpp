#pragma once

#include <cstdint>

#include "f0reg/nn/model.hpp"

namespace f0reg::nn {

struct AdamConfig {
  double lr = 0.0007;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
  bool operator==(const AdamConfig&) const = default;
};

struct OptimizerState {
  AdamConfig config;
  Gradients first_moment;
  Gradients second_moment;
  std::uint64_t step = 0;

  bool operator==(const OptimizerState&) const = default;
};

OptimizerState make_optimizer_state(const MLPModel& model, AdamConfig config);

/// One bias-corrected adaptive-moment update:
///   m = b1 m + (1-b1) g,  v = b2 v + (1-b2) g^2
///   w -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
/// Throws NumericalError naming the tensor if any gradient is non-finite;
/// in that case nothing is modified.
void optimizer_step(MLPModel& model, const Gradients& grads, OptimizerState& state);

/// Plain gradient descent, w -= lr * g.
void sgd_step(MLPModel& model, const Gradients& grads, double lr);

/// Throws NumericalError if any gradient entry is NaN/Inf.
void check_finite(const Gradients& grads, const char* what);

}  // namespace f0reg::nn
