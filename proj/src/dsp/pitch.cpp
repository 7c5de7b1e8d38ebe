#include "f0reg/dsp/pitch.hpp"

#include <cmath>
#include <string>

#include "f0reg/matrix.hpp"

namespace f0reg::dsp {

void TrackerConfig::validate() const {
  if (!(f_min > 0.0)) throw ConfigError("tracker f_min must be > 0");
  if (!(f_min < f_max)) throw ConfigError("tracker f_min must be below f_max");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ConfigError("tracker threshold must lie in (0, 1)");
  if (!(hop > 0.0) || !(window > 0.0)) throw ConfigError("hop and window must be > 0");
  if (!(silence_rms >= 0.0)) throw ConfigError("silence_rms must be >= 0");
}

std::vector<double> normalized_difference(std::span<const double> frame,
                                          std::size_t max_lag) {
  const std::size_t w = frame.size();
  require_shape(max_lag < w, "normalized_difference: max lag must be below frame length");
  // Mean squared difference over the overlapping part, so long lags with
  // fewer overlapping samples are not favoured.
  std::vector<double> d(max_lag + 1, 0.0);
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (std::size_t j = 0; j + lag < w; ++j) {
      const double e = frame[j] - frame[j + lag];
      s += e * e;
    }
    d[lag] = s / static_cast<double>(w - lag);
  }
  std::vector<double> cmnd(max_lag + 1, 1.0);
  double running = 0.0;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    running += d[lag];
    cmnd[lag] = running > 0.0 ? d[lag] * static_cast<double>(lag) / running : 1.0;
  }
  return cmnd;
}

namespace {

double frame_f0(std::span<const double> frame, double rate, const TrackerConfig& cfg,
                std::size_t min_lag, std::size_t max_lag) {
  double energy = 0.0;
  for (double x : frame) energy += x * x;
  if (std::sqrt(energy / static_cast<double>(frame.size())) < cfg.silence_rms) return 0.0;

  const auto cmnd = normalized_difference(frame, max_lag);
  std::size_t lag = min_lag;
  while (lag <= max_lag && !(cmnd[lag] < cfg.threshold)) ++lag;
  if (lag > max_lag) return 0.0;
  while (lag + 1 <= max_lag && cmnd[lag + 1] < cmnd[lag]) ++lag;

  double refined = static_cast<double>(lag);
  if (lag > 1 && lag < max_lag) {
    const double a = cmnd[lag - 1], b = cmnd[lag], c = cmnd[lag + 1];
    const double denom = a - 2.0 * b + c;
    if (denom > 0.0) refined += 0.5 * (a - c) / denom;
  }
  const double f0 = rate / refined;
  return (f0 >= cfg.f_min && f0 <= cfg.f_max) ? f0 : 0.0;
}

}  // namespace

F0Trajectory extract_f0(const AudioBuffer& audio, const TrackerConfig& cfg) {
  cfg.validate();
  if (!(audio.sample_rate > 0.0)) throw ConfigError("sample rate must be > 0");
  const double rate = audio.sample_rate;
  const auto win = static_cast<std::size_t>(std::lround(cfg.window * rate));
  const auto hop = static_cast<std::size_t>(std::lround(cfg.hop * rate));
  if (hop == 0 || win < 2) throw ConfigError("hop/window too short for sample rate");
  if (audio.samples.size() < win)
    throw ConfigError("audio shorter than one analysis window (" +
                      std::to_string(audio.samples.size()) + " < " +
                      std::to_string(win) + " samples)");
  const auto min_lag =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(rate / cfg.f_max)));
  const auto max_lag = static_cast<std::size_t>(std::ceil(rate / cfg.f_min));
  if (max_lag + 1 >= win)
    throw ConfigError("analysis window must exceed the longest period (1/f_min)");

  const std::size_t n_frames = (audio.samples.size() - win) / hop + 1;
  F0Trajectory out;
  out.hop = cfg.hop;
  out.window = cfg.window;
  out.values.assign(n_frames, 0.0);
  const std::span<const double> all(audio.samples);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(n_frames); ++n) {
    const auto start = static_cast<std::size_t>(n) * hop;
    out.values[static_cast<std::size_t>(n)] =
        frame_f0(all.subspan(start, win), rate, cfg, min_lag, max_lag);
  }
  return out;
}

}  // namespace f0reg::dsp
