#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "f0reg/matrix.hpp"

namespace f0reg::nn {

enum class Activation { relu, tanh, identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Architecture description. Output width is always 2:
/// column 0 is the normalized log-F0 estimate, column 1 the voicing logit.
struct ModelConfig {
  std::size_t input_dim = 768;
  std::vector<std::size_t> hidden = {256, 256, 256};
  Activation activation = Activation::relu;
  double dropout_p = 0.0;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

inline constexpr std::size_t kOutputDim = 2;
inline constexpr std::size_t kF0Head = 0;
inline constexpr std::size_t kVoicingHead = 1;

/// Weights (out x in, row-major) and bias of one linear layer.
/// Shape is fixed at construction; only values may change.
class LayerParams {
 public:
  LayerParams() = default;
  LayerParams(std::size_t out_dim, std::size_t in_dim)
      : weights_(out_dim, in_dim), bias_(out_dim, 0.0) {}

  std::size_t out_dim() const { return weights_.rows(); }
  std::size_t in_dim() const { return weights_.cols(); }

  const Matrix& weights() const { return weights_; }
  double& weight(std::size_t o, std::size_t i) { return weights_(o, i); }
  double weight(std::size_t o, std::size_t i) const { return weights_(o, i); }
  std::span<double> weight_data() { return weights_.flat(); }
  std::span<const double> weight_data() const { return weights_.flat(); }

  std::span<double> bias() { return bias_; }
  std::span<const double> bias() const { return bias_; }

  bool same_shape(const LayerParams& other) const {
    return out_dim() == other.out_dim() && in_dim() == other.in_dim();
  }
  bool operator==(const LayerParams&) const = default;

 private:
  Matrix weights_;
  std::vector<double> bias_;
};

/// Feed-forward regressor: hidden FC blocks (linear, dropout, activation)
/// followed by an output FC block (linear, dropout) with two neurons.
class MLPModel {
 public:
  MLPModel() = default;
  /// Builds a model with the configured shapes and all parameters zero.
  explicit MLPModel(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  std::size_t input_dim() const { return config_.input_dim; }
  std::size_t num_layers() const { return layers_.size(); }
  std::size_t parameter_count() const;

  LayerParams& layer(std::size_t i) { return layers_.at(i); }
  const LayerParams& layer(std::size_t i) const { return layers_.at(i); }
  std::span<LayerParams> layers() { return layers_; }
  std::span<const LayerParams> layers() const { return layers_; }

  /// Dropout is a hyperparameter of training, not of the weights.
  void set_dropout(double p);

  bool operator==(const MLPModel&) const = default;

 private:
  ModelConfig config_;
  std::vector<LayerParams> layers_;
};

/// Parameter gradients; same layout as the model's layers.
using Gradients = std::vector<LayerParams>;

Gradients zero_gradients(const MLPModel& model);

/// Fan-in scaled uniform weights U(-sqrt(6/fan_in), +sqrt(6/fan_in)), zero bias.
MLPModel init_model(const ModelConfig& config, std::uint64_t seed);

enum class Mode { train, eval };

/// Intermediate values of one forward pass, consumed by backward().
struct ForwardTrace {
  Mode mode = Mode::eval;
  Matrix input;
  std::vector<Matrix> pre;    // linear outputs, per layer
  std::vector<Matrix> post;   // block outputs (after dropout and activation)
  std::vector<Matrix> masks;  // train mode only: 0 or 1/(1-p) per unit
};

struct ForwardResult {
  Matrix preds;  // B x 2
  ForwardTrace trace;
};

/// Runs the network on a batch. In train mode inverted dropout is drawn from
/// `seed`; in eval mode dropout is the identity and `seed` is unused.
ForwardResult forward(const MLPModel& model, const Matrix& batch, Mode mode,
                      std::uint64_t seed = 0);

/// Predictions only, eval mode, without keeping a trace.
Matrix predict(const MLPModel& model, const Matrix& batch);

/// Backpropagates d(loss)/d(preds) through the recorded trace.
Gradients backward(const MLPModel& model, const ForwardTrace& trace,
                   const Matrix& grad_preds);

}  // namespace f0reg::nn
