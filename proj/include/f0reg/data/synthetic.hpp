#pragma once

#include <cstdint>

#include "json.hpp"

#include "f0reg/data/corpus.hpp"

namespace f0reg::data {

/// Parameters of the synthetic corpus. Even-numbered speakers get the low
/// register, odd-numbered speakers the high one.
struct SyntheticSpec {
  std::size_t n_speakers = 16;
  std::size_t utterances_per_speaker = 40;
  std::size_t frames_per_utterance = 200;
  double register_low_hz = 120.0;
  double register_high_hz = 220.0;
  double register_spread_hz = 15.0;
  double contour_semitones = 3.0;
  double duty_cycle = 0.7;
  double noise_semitones = 0.3;
  double bn_noise = 0.01;
  std::size_t d_bn = 256;
  std::size_t d_xv = 512;
  std::uint64_t seed = 0;

  void validate() const;
};

// Layout of the generated features.
inline constexpr std::size_t kContourChannel = 0;
inline constexpr std::size_t kVoicingChannel = 1;
inline constexpr std::size_t kPositionalPairs = 4;
inline constexpr std::size_t kMinBnDim = 2 + 2 * kPositionalPairs;
inline constexpr std::size_t kRegisterBlock = 16;  // leading x-vector coordinates
inline constexpr double kRegisterPivotHz = 170.0;

/// Register mean F0 (Hz) drawn for speaker `s`.
double speaker_register_hz(const SyntheticSpec& spec, std::size_t speaker);

/// Per utterance: a smooth contour c[t] (2-4 low-frequency sinusoids, peak
/// |c| <= contour_semitones), alternating voiced/unvoiced runs at the duty
/// cycle, F0 = mu * 2^((c + eps) / 12) on voiced frames. Features carry c,
/// the voicing flag (+1 voiced, -1 unvoiced) and positional channels; the x-vector is a random unit
/// vector whose first kRegisterBlock coordinates are set to ln(mu / 170).
Corpus gen_synthetic(const SyntheticSpec& spec);

nlohmann::json to_json(const SyntheticSpec& spec);
/// Unknown keys are rejected, as is `seed`, which always comes from the caller.
/// Missing keys keep their defaults.
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

}  // namespace f0reg::data
