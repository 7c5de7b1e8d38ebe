#include "f0reg/training/plateau.hpp"

#include <cmath>

#include "f0reg/error.hpp"

namespace f0reg::training {

PlateauAction plateau_step(PlateauState& state, double val_loss) {
  if (std::isnan(val_loss)) throw DomainError("plateau_step: validation loss is NaN");
  if (state.patience < 1) throw ConfigError("plateau patience must be >= 1");
  if (state.latched) return PlateauAction::stop;

  if (val_loss < state.best_val) {
    state.best_val = val_loss;
    state.stale_count = 0;
    return PlateauAction::none;
  }
  if (++state.stale_count < state.patience) return PlateauAction::none;

  if (state.on_plateau == PlateauAction::stop) {
    state.latched = true;
    state.stale_count = state.patience;
    return PlateauAction::stop;
  }
  state.stale_count = 0;
  return state.on_plateau;
}

}  // namespace f0reg::training
