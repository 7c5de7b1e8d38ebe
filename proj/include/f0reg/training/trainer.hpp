#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"

#include "f0reg/data/frames.hpp"
#include "f0reg/dsp/f0.hpp"
#include "f0reg/nn/bundle.hpp"
#include "f0reg/nn/model.hpp"

namespace f0reg::training {

/// Defaults reproduce the tuned regimen: alpha 0.00022, lr 0.0007, no dropout,
/// early stop after 10 stale epochs, lr x0.1 after 5.
struct TrainConfig {
  double lr = 0.0007;
  double alpha = 0.00022;
  double dropout_p = 0.0;
  std::size_t batch_size = 1024;
  std::size_t max_epochs = 200;
  int early_stop_patience = 10;
  int lr_patience = 5;
  double lr_factor = 0.1;
  double val_fraction = 0.10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);
/// Unknown keys are rejected. `seed` is not a config key; it always comes
/// from the caller.
TrainConfig train_config_from_json(const nlohmann::json& j);

struct EpochReport {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;  // learning rate used during this epoch
  int stale_epochs_early_stop = 0;
  int stale_epochs_lr = 0;
};

using TrainedBundle = nn::ModelBundle;

struct TrainResult {
  TrainedBundle bundle;  // parameters of the best-validation epoch
  std::vector<EpochReport> history;
  std::size_t best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochReport&)>;

/// Mini-batch training with validation after every epoch, plateau learning
/// rate reduction, early stopping and best-epoch restoration.
/// Throws NumericalError (with epoch and batch) on a non-finite loss.
TrainResult train(const data::FrameMatrix& train_frames, const data::FrameMatrix& val_frames,
                  const nn::ModelConfig& model_cfg, const TrainConfig& cfg,
                  const dsp::NormStats& stats, const EpochCallback& on_epoch = {});

/// Full-set loss in eval mode.
double evaluate_loss(const nn::MLPModel& model, const data::FrameMatrix& frames, double alpha);

/// Frame-wise F0 for one utterance: eval-mode forward, sigmoid on the voicing
/// logit, gating, denormalization.
dsp::F0Trajectory predict_utterance(const TrainedBundle& bundle, const FloatMatrix& bn,
                                    std::span<const float> xvec, double hop = 0.010,
                                    double window = 0.025);

/// Everything `cmd_train` does after loading a corpus: stats over the corpus,
/// tall matrix, row split, training.
TrainResult train_on_corpus(std::span<const data::UtteranceRecord> corpus,
                            const nn::ModelConfig& model_cfg, const TrainConfig& cfg,
                            const EpochCallback& on_epoch = {});

/// `epoch,train_loss,val_loss,lr`
void write_history_csv(const std::filesystem::path& path,
                       std::span<const EpochReport> history);
std::string history_csv(std::span<const EpochReport> history);

}  // namespace f0reg::training
