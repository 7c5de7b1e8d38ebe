#pragma once

#include <span>

#include "f0reg/nn/model.hpp"

namespace f0reg::nn {

struct GradCheckOptions {
  double epsilon = 1e-3;  // step of the fourth-order central stencil
  // Denominator floor for |a - f| / max(|a|, |f|, floor); gradients smaller
  // than this are compared in absolute terms.
  double floor = 1e-7;
  // A probe whose +/- epsilon evaluations move some ReLU pre-activation across
  // zero is retried with epsilon / 10, up to this many times, then skipped.
  int kink_retries = 3;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t parameters_checked = 0;
  std::size_t parameters_skipped = 0;  // unresolvable activation kinks
};

/// Compares backward() against fourth-order central differences of loss_forward()
/// for every weight and bias, in eval mode.
GradCheckReport grad_check(const MLPModel& model, const Matrix& batch,
                           std::span<const double> targets,
                           std::span<const char> voiced, double alpha,
                           const GradCheckOptions& options = {});

}  // namespace f0reg::nn
