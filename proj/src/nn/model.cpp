#include "f0reg/nn/model.hpp"

#include <cmath>
#include <random>

#include "f0reg/kernels.hpp"

namespace f0reg::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
  }
  return "unknown";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "identity") return Activation::identity;
  throw ConfigError("unknown activation '" + name + "'");
}

void ModelConfig::validate() const {
  if (input_dim == 0) throw ConfigError("model input_dim must be >= 1");
  if (hidden.empty()) throw ConfigError("model needs at least one hidden layer");
  for (std::size_t i = 0; i < hidden.size(); ++i)
    if (hidden[i] == 0)
      throw ConfigError("hidden layer " + std::to_string(i) + " has zero width");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0))
    throw ConfigError("dropout_p must lie in [0, 1)");
}

MLPModel::MLPModel(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  std::size_t in = config_.input_dim;
  for (auto width : config_.hidden) {
    layers_.emplace_back(width, in);
    in = width;
  }
  layers_.emplace_back(kOutputDim, in);
}

std::size_t MLPModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights().size() + l.bias().size();
  return n;
}

void MLPModel::set_dropout(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout_p must lie in [0, 1)");
  config_.dropout_p = p;
}

Gradients zero_gradients(const MLPModel& model) {
  Gradients g;
  g.reserve(model.num_layers());
  for (const auto& l : model.layers()) g.emplace_back(l.out_dim(), l.in_dim());
  return g;
}

MLPModel init_model(const ModelConfig& config, std::uint64_t seed) {
  MLPModel model(config);
  std::mt19937_64 rng(seed);
  for (auto& layer : model.layers()) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.in_dim()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& w : layer.weight_data()) w = dist(rng);
  }
  return model;
}

namespace {

bool is_output(const MLPModel& model, std::size_t layer) {
  return layer + 1 == model.num_layers();
}

void apply_activation(Activation act, Matrix& m) {
  switch (act) {
    case Activation::relu:
      for (auto& v : m.flat()) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::tanh:
      for (auto& v : m.flat()) v = std::tanh(v);
      break;
    case Activation::identity:
      break;
  }
}

// d(activation)/d(input), expressed through the activation output.
void multiply_activation_derivative(Activation act, const Matrix& out, Matrix& grad) {
  auto g = grad.flat();
  auto h = out.flat();
  switch (act) {
    case Activation::relu:
      for (std::size_t i = 0; i < g.size(); ++i)
        if (!(h[i] > 0.0)) g[i] = 0.0;
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - h[i] * h[i];
      break;
    case Activation::identity:
      break;
  }
}

// z = a * W^T + b
Matrix linear(const LayerParams& layer, const Matrix& a) {
  Matrix wt(layer.in_dim(), layer.out_dim());
  kernels::transpose(layer.weights(), wt);
  Matrix z(a.rows(), layer.out_dim());
  kernels::gemm(a, wt, z);
  const auto bias = layer.bias();
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias[c];
  }
  return z;
}

Matrix draw_mask(std::size_t rows, std::size_t cols, double p, std::mt19937_64& rng) {
  Matrix mask(rows, cols, 1.0);
  if (p <= 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - p);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& m : mask.flat()) m = u(rng) < p ? 0.0 : keep_scale;
  return mask;
}

void check_batch(const MLPModel& model, const Matrix& batch) {
  require_shape(batch.cols() == model.input_dim(),
                "forward: batch has " + std::to_string(batch.cols()) +
                    " columns, model expects " + std::to_string(model.input_dim()));
}

}  // namespace

ForwardResult forward(const MLPModel& model, const Matrix& batch, Mode mode,
                      std::uint64_t seed) {
  check_batch(model, batch);
  ForwardResult res;
  auto& tr = res.trace;
  tr.mode = mode;
  tr.input = batch;
  std::mt19937_64 rng(seed);
  const Matrix* a = &tr.input;
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    tr.pre.push_back(linear(model.layer(l), *a));
    Matrix h = tr.pre.back();
    if (mode == Mode::train) {
      tr.masks.push_back(draw_mask(h.rows(), h.cols(), model.config().dropout_p, rng));
      auto hm = h.flat();
      auto mm = tr.masks.back().flat();
      for (std::size_t i = 0; i < hm.size(); ++i) hm[i] *= mm[i];
    }
    if (!is_output(model, l)) apply_activation(model.config().activation, h);
    tr.post.push_back(std::move(h));
    a = &tr.post.back();
  }
  res.preds = tr.post.back();
  return res;
}

Matrix predict(const MLPModel& model, const Matrix& batch) {
  check_batch(model, batch);
  Matrix a = batch;
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    Matrix z = linear(model.layer(l), a);
    if (!is_output(model, l)) apply_activation(model.config().activation, z);
    a = std::move(z);
  }
  return a;
}

Gradients backward(const MLPModel& model, const ForwardTrace& trace,
                   const Matrix& grad_preds) {
  const std::size_t n_layers = model.num_layers();
  require_shape(trace.pre.size() == n_layers && trace.post.size() == n_layers,
                "backward: trace does not match model depth");
  require_shape(trace.mode == Mode::eval || trace.masks.size() == n_layers,
                "backward: train-mode trace is missing dropout masks");
  require_shape(trace.input.cols() == model.input_dim(),
                "backward: trace input width does not match model");
  const std::size_t batch = trace.input.rows();
  require_shape(grad_preds.rows() == batch && grad_preds.cols() == kOutputDim,
                "backward: grad_preds must be B x 2");
  for (std::size_t l = 0; l < n_layers; ++l)
    require_shape(trace.pre[l].rows() == batch &&
                      trace.pre[l].cols() == model.layer(l).out_dim(),
                  "backward: trace layer " + std::to_string(l) + " has wrong shape");

  Gradients grads = zero_gradients(model);
  Matrix delta = grad_preds;  // d loss / d (block output)
  for (std::size_t li = n_layers; li-- > 0;) {
    const auto& layer = model.layer(li);
    if (!is_output(model, li))
      multiply_activation_derivative(model.config().activation, trace.post[li], delta);
    if (trace.mode == Mode::train) {
      auto d = delta.flat();
      auto m = trace.masks[li].flat();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] *= m[i];
    }
    // delta is now d loss / d z for this layer.
    const Matrix& a_prev = li == 0 ? trace.input : trace.post[li - 1];
    Matrix delta_t(delta.cols(), delta.rows());
    kernels::transpose(delta, delta_t);
    Matrix dw(layer.out_dim(), layer.in_dim());
    kernels::gemm(delta_t, a_prev, dw);
    std::copy(dw.flat().begin(), dw.flat().end(), grads[li].weight_data().begin());
    kernels::column_sums(delta, grads[li].bias());
    if (li > 0) {
      Matrix next(batch, layer.in_dim());
      kernels::gemm(delta, layer.weights(), next);
      delta = std::move(next);
    }
  }
  return grads;
}

}  // namespace f0reg::nn
