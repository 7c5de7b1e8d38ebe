#pragma once

#include <span>

#include "f0reg/data/corpus.hpp"
#include "f0reg/nn/model.hpp"
#include "f0reg/training/trainer.hpp"
#include "f0reg/tuner/study.hpp"

namespace f0reg::tuner {

/// Reduced-budget training run per trial; the objective value is the best
/// validation loss reached. Split, stats and seeds are shared by all trials.
/// The returned objective keeps a reference to `corpus`.
Objective training_objective(std::span<const data::UtteranceRecord> corpus,
                             const nn::ModelConfig& model_cfg,
                             const training::TrainConfig& base, std::size_t max_epochs = 30);

}  // namespace f0reg::tuner
