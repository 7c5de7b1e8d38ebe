#pragma once

#include <span>
#include <vector>

namespace f0reg::dsp {

/// Frame-wise F0 in Hz; 0.0 marks an unvoiced frame.
struct F0Trajectory {
  std::vector<double> values;
  double hop = 0.010;     // seconds per frame
  double window = 0.025;  // analysis window, seconds

  std::size_t size() const { return values.size(); }
  bool voiced(std::size_t n) const { return values[n] > 0.0; }
  std::size_t voiced_count() const;
  bool operator==(const F0Trajectory&) const = default;
};

/// Global statistics of ln(F0) over voiced frames.
struct NormStats {
  static constexpr double kStdFloor = 1e-6;
  double mean_log = 0.0;
  double std_log = 1.0;
  bool operator==(const NormStats&) const = default;
};

/// Pools every voiced frame of every trajectory. Population standard
/// deviation, floored at NormStats::kStdFloor.
NormStats compute_norm_stats(std::span<const F0Trajectory> trajectories);

/// (ln f0 - mean_log) / std_log; f0_hz must be > 0.
double normalize(double f0_hz, const NormStats& stats);
/// exp(mean_log + std_log * y)
double denormalize(double y, const NormStats& stats);

/// Denormalized F0 when voicing_prob > 0.5, otherwise 0.0.
double gate_output(double pred_norm, double voicing_prob, const NormStats& stats);

}  // namespace f0reg::dsp
