#include "f0reg/tuner/objective.hpp"

#include <algorithm>
#include <limits>
#include <memory>

namespace f0reg::tuner {

Objective training_objective(std::span<const data::UtteranceRecord> corpus,
                             const nn::ModelConfig& model_cfg,
                             const training::TrainConfig& base, std::size_t max_epochs) {
  if (max_epochs < 1) throw ConfigError("trial max_epochs must be >= 1");
  training::TrainConfig cfg = base;
  cfg.max_epochs = max_epochs;
  cfg.validate();
  return [corpus, model_cfg, cfg](const Params& p) {
    training::TrainConfig trial = cfg;
    trial.lr = p.lr;
    trial.alpha = p.alpha;
    trial.dropout_p = p.dropout_p;
    const auto result = training::train_on_corpus(corpus, model_cfg, trial);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : result.history) best = std::min(best, r.val_loss);
    return best;
  };
}

}  // namespace f0reg::tuner
