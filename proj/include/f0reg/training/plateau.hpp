#pragma once

#include <limits>

namespace f0reg::training {

enum class PlateauAction { none, reduce_lr, stop };

/// Counts epochs without strict improvement of the validation loss. When the
/// count reaches `patience` the configured action fires: a reduce_lr monitor
/// resets its count and keeps going, a stop monitor latches.
struct PlateauState {
  double best_val = std::numeric_limits<double>::infinity();
  int stale_count = 0;
  int patience = 1;
  PlateauAction on_plateau = PlateauAction::reduce_lr;
  bool latched = false;

  static PlateauState lr_scheduler(int patience) {
    return {std::numeric_limits<double>::infinity(), 0, patience, PlateauAction::reduce_lr, false};
  }
  static PlateauState early_stopping(int patience) {
    return {std::numeric_limits<double>::infinity(), 0, patience, PlateauAction::stop, false};
  }
};

/// Throws DomainError on NaN; ConfigError if patience < 1.
PlateauAction plateau_step(PlateauState& state, double val_loss);

}  // namespace f0reg::training
