#include "f0reg/dsp/f0.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "f0reg/error.hpp"

namespace f0reg::dsp {

std::size_t F0Trajectory::voiced_count() const {
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [](double v) { return v > 0.0; }));
}

NormStats compute_norm_stats(std::span<const F0Trajectory> trajectories) {
  // Two passes over the pooled voiced frames; utterance order does not matter
  // beyond floating-point summation order.
  std::size_t n = 0;
  double sum = 0.0;
  for (const auto& t : trajectories)
    for (double v : t.values)
      if (v > 0.0) {
        sum += std::log(v);
        ++n;
      }
  if (n == 0) throw InsufficientDataError("no voiced frames for normalization");
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const auto& t : trajectories)
    for (double v : t.values)
      if (v > 0.0) {
        const double d = std::log(v) - mean;
        ss += d * d;
      }
  NormStats stats;
  stats.mean_log = mean;
  stats.std_log = std::max(std::sqrt(ss / static_cast<double>(n)), NormStats::kStdFloor);
  return stats;
}

double normalize(double f0_hz, const NormStats& stats) {
  if (!(f0_hz > 0.0))
    throw DomainError("normalize: F0 must be > 0 Hz, got " + std::to_string(f0_hz));
  return (std::log(f0_hz) - stats.mean_log) / stats.std_log;
}

double denormalize(double y, const NormStats& stats) {
  return std::exp(stats.mean_log + stats.std_log * y);
}

double gate_output(double pred_norm, double voicing_prob, const NormStats& stats) {
  return voicing_prob > 0.5 ? denormalize(pred_norm, stats) : 0.0;
}

}  // namespace f0reg::dsp
