#include "f0reg/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "f0reg/nn/loss.hpp"

namespace f0reg::nn {

namespace {

struct Probe {
  double loss = 0.0;
  std::vector<char> active;  // ReLU on/off pattern over all hidden units
};

Probe evaluate(const MLPModel& model, const Matrix& batch,
               std::span<const double> targets, std::span<const char> voiced,
               double alpha) {
  auto fr = forward(model, batch, Mode::eval);
  Probe p;
  p.loss = loss_forward(fr.preds, targets, voiced, alpha).total;
  if (model.config().activation == Activation::relu) {
    for (std::size_t l = 0; l + 1 < fr.trace.pre.size(); ++l)
      for (double z : fr.trace.pre[l].flat()) p.active.push_back(z > 0.0 ? 1 : 0);
  }
  return p;
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

}  // namespace

GradCheckReport grad_check(const MLPModel& model, const Matrix& batch,
                           std::span<const double> targets,
                           std::span<const char> voiced, double alpha,
                           const GradCheckOptions& options) {
  if (!(options.epsilon > 0.0)) throw ConfigError("grad_check: epsilon must be > 0");
  auto fr = forward(model, batch, Mode::eval);
  const Matrix grad_preds = loss_backward(fr.preds, targets, voiced, alpha);
  const Gradients analytic = backward(model, fr.trace, grad_preds);
  const Probe base = evaluate(model, batch, targets, voiced, alpha);

  GradCheckReport report;
  MLPModel work = model;

  auto check_param = [&](double& param, double grad) {
    const double saved = param;
    double eps = options.epsilon;
    for (int attempt = 0; attempt <= options.kink_retries; ++attempt, eps /= 10.0) {
      // Fourth-order central stencil: truncation error O(eps^4), so eps can
      // stay large enough to keep rounding noise well below tiny gradients.
      double loss[4];
      bool kink = false;
      const double offsets[4] = {2.0 * eps, eps, -eps, -2.0 * eps};
      for (int k = 0; k < 4 && !kink; ++k) {
        param = saved + offsets[k];
        const Probe p = evaluate(work, batch, targets, voiced, alpha);
        loss[k] = p.loss;
        kink = p.active != base.active;
      }
      param = saved;
      if (kink) continue;
      // Differences first, so a locally constant loss gives exactly zero.
      const double numeric = (8.0 * (loss[1] - loss[2]) - (loss[0] - loss[3])) / (12.0 * eps);
      report.max_rel_error =
          std::max(report.max_rel_error, relative_error(grad, numeric, options.floor));
      ++report.parameters_checked;
      return;
    }
    ++report.parameters_skipped;
  };

  for (std::size_t l = 0; l < work.num_layers(); ++l) {
    auto w = work.layer(l).weight_data();
    auto gw = analytic[l].weight_data();
    for (std::size_t i = 0; i < w.size(); ++i) check_param(w[i], gw[i]);
    auto b = work.layer(l).bias();
    auto gb = analytic[l].bias();
    for (std::size_t i = 0; i < b.size(); ++i) check_param(b[i], gb[i]);
  }
  return report;
}

}  // namespace f0reg::nn
