#pragma once

#include <span>

#include "f0reg/matrix.hpp"

namespace f0reg::nn {

/// Joint objective: masked MSE on the F0 head plus alpha-weighted BCE on the
/// voicing logit.
struct LossBreakdown {
  double total = 0.0;
  double mse_term = 0.0;  // mean over voiced rows; 0 when there are none
  double bce_term = 0.0;  // mean over all rows
  double alpha = 0.0;
  std::size_t n_voiced = 0;
};

/// Stable binary cross entropy of a logit against a 0/1 label.
double bce_with_logit(double logit, bool label);
double sigmoid(double x);

LossBreakdown loss_forward(const Matrix& preds, std::span<const double> targets_f0,
                           std::span<const char> voiced, double alpha);

/// d(total)/d(preds); column 0 is exactly 0 on unvoiced rows.
Matrix loss_backward(const Matrix& preds, std::span<const double> targets_f0,
                     std::span<const char> voiced, double alpha);

}  // namespace f0reg::nn
