#pragma once

#include <vector>

#include "f0reg/dsp/f0.hpp"

namespace f0reg::dsp {

struct AudioBuffer {
  std::vector<double> samples;  // nominally in [-1, 1]
  double sample_rate = 16000.0;
};

struct TrackerConfig {
  double f_min = 60.0;
  double f_max = 400.0;
  double threshold = 0.15;    // dip level of the normalized difference function
  double silence_rms = 1e-4;  // frames quieter than this are unvoiced
  double hop = 0.010;
  double window = 0.025;

  void validate() const;
};

/// YIN-style tracker: cumulative-mean-normalized difference function, first
/// dip below threshold, descent to the local minimum, parabolic refinement.
/// Frames are independent and processed in parallel.
F0Trajectory extract_f0(const AudioBuffer& audio, const TrackerConfig& cfg = {});

/// Normalized difference function of one frame for lags 0..max_lag
/// (index = lag). Exposed for tests.
std::vector<double> normalized_difference(std::span<const double> frame,
                                          std::size_t max_lag);

}  // namespace f0reg::dsp
