#pragma once

#include <stdexcept>
#include <string>

namespace f0reg {

// Error classes map one-to-one onto CLI exit codes (see tools/f0reg_cli.cpp).

/// Invalid configuration or argument value.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch between tensors, models, traces or records.
struct ShapeError : ConfigError {
  using ConfigError::ConfigError;
};

/// Argument outside a function's mathematical domain.
struct DomainError : ConfigError {
  using ConfigError::ConfigError;
};

/// Not enough data to compute a quantity (e.g. fewer than two voiced frames).
struct InsufficientDataError : ConfigError {
  using ConfigError::ConfigError;
};

/// File could not be opened, read, written or parsed.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// NaN/Inf encountered in losses, gradients or parameters.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace f0reg
