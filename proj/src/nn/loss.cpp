#include "f0reg/nn/loss.hpp"

#include <cmath>

#include "f0reg/nn/model.hpp"

namespace f0reg::nn {

namespace {

void check_inputs(const Matrix& preds, std::span<const double> targets,
                  std::span<const char> voiced, double alpha) {
  require_shape(preds.cols() == kOutputDim, "loss: preds must have 2 columns");
  require_shape(preds.rows() >= 1, "loss: empty batch");
  require_shape(targets.size() == preds.rows() && voiced.size() == preds.rows(),
                "loss: preds, targets and voiced lengths differ");
  if (!(alpha >= 0.0)) throw DomainError("loss: alpha must be >= 0");
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double bce_with_logit(double logit, bool label) {
  // max(x, 0) - x*y + log(1 + exp(-|x|))
  return std::max(logit, 0.0) - (label ? logit : 0.0) +
         std::log1p(std::exp(-std::abs(logit)));
}

LossBreakdown loss_forward(const Matrix& preds, std::span<const double> targets_f0,
                           std::span<const char> voiced, double alpha) {
  check_inputs(preds, targets_f0, voiced, alpha);
  LossBreakdown out;
  out.alpha = alpha;
  double sq = 0.0, ce = 0.0;
  for (std::size_t r = 0; r < preds.rows(); ++r) {
    if (voiced[r]) {
      const double e = preds(r, kF0Head) - targets_f0[r];
      sq += e * e;
      ++out.n_voiced;
    }
    ce += bce_with_logit(preds(r, kVoicingHead), voiced[r] != 0);
  }
  out.mse_term = out.n_voiced > 0 ? sq / static_cast<double>(out.n_voiced) : 0.0;
  out.bce_term = ce / static_cast<double>(preds.rows());
  out.total = out.mse_term + alpha * out.bce_term;
  return out;
}

Matrix loss_backward(const Matrix& preds, std::span<const double> targets_f0,
                     std::span<const char> voiced, double alpha) {
  check_inputs(preds, targets_f0, voiced, alpha);
  std::size_t n_voiced = 0;
  for (auto v : voiced) n_voiced += v ? 1 : 0;
  Matrix grad(preds.rows(), kOutputDim);
  const double mse_scale = n_voiced > 0 ? 2.0 / static_cast<double>(n_voiced) : 0.0;
  const double bce_scale = alpha / static_cast<double>(preds.rows());
  for (std::size_t r = 0; r < preds.rows(); ++r) {
    grad(r, kF0Head) = voiced[r] ? mse_scale * (preds(r, kF0Head) - targets_f0[r]) : 0.0;
    grad(r, kVoicingHead) =
        bce_scale * (sigmoid(preds(r, kVoicingHead)) - (voiced[r] ? 1.0 : 0.0));
  }
  return grad;
}

}  // namespace f0reg::nn
