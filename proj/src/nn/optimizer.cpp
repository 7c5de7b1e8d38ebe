#include "f0reg/nn/optimizer.hpp"

#include <cmath>
#include <string>

namespace f0reg::nn {

namespace {

void check_layout(const MLPModel& model, const Gradients& grads) {
  require_shape(grads.size() == model.num_layers(),
                "optimizer: gradient count does not match model depth");
  for (std::size_t l = 0; l < grads.size(); ++l)
    require_shape(grads[l].same_shape(model.layer(l)),
                  "optimizer: gradient for layer " + std::to_string(l) +
                      " has wrong shape");
}

void adam_update(std::span<double> w, std::span<const double> g, std::span<double> m,
                 std::span<double> v, const AdamConfig& c, double corr1, double corr2) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
    const double m_hat = m[i] / corr1;
    const double v_hat = v[i] / corr2;
    w[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

}  // namespace

void AdamConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
}

OptimizerState make_optimizer_state(const MLPModel& model, AdamConfig config) {
  config.validate();
  return {config, zero_gradients(model), zero_gradients(model), 0};
}

void check_finite(const Gradients& grads, const char* what) {
  for (std::size_t l = 0; l < grads.size(); ++l) {
    for (double x : grads[l].weight_data())
      if (!std::isfinite(x))
        throw NumericalError(std::string(what) + ": non-finite value in layer " +
                             std::to_string(l) + " weights");
    for (double x : grads[l].bias())
      if (!std::isfinite(x))
        throw NumericalError(std::string(what) + ": non-finite value in layer " +
                             std::to_string(l) + " bias");
  }
}

void optimizer_step(MLPModel& model, const Gradients& grads, OptimizerState& state) {
  check_layout(model, grads);
  check_layout(model, state.first_moment);
  check_layout(model, state.second_moment);
  check_finite(grads, "optimizer gradient");

  ++state.step;
  const auto t = static_cast<double>(state.step);
  const double corr1 = 1.0 - std::pow(state.config.beta1, t);
  const double corr2 = 1.0 - std::pow(state.config.beta2, t);
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    auto& layer = model.layer(l);
    adam_update(layer.weight_data(), grads[l].weight_data(),
                state.first_moment[l].weight_data(), state.second_moment[l].weight_data(),
                state.config, corr1, corr2);
    adam_update(layer.bias(), grads[l].bias(), state.first_moment[l].bias(),
                state.second_moment[l].bias(), state.config, corr1, corr2);
  }
}

void sgd_step(MLPModel& model, const Gradients& grads, double lr) {
  check_layout(model, grads);
  check_finite(grads, "sgd gradient");
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    auto w = model.layer(l).weight_data();
    auto g = grads[l].weight_data();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
    auto b = model.layer(l).bias();
    auto gb = grads[l].bias();
    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= lr * gb[i];
  }
}

}  // namespace f0reg::nn
