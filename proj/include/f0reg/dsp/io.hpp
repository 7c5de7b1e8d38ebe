#pragma once

#include <filesystem>
#include <optional>

#include "f0reg/dsp/f0.hpp"
#include "f0reg/dsp/pitch.hpp"

namespace f0reg::dsp {

enum class WavEncoding { pcm16, float32 };

/// Reads a mono RIFF/WAVE file, 16-bit PCM or 32-bit IEEE float.
/// If `expected_rate` is given, a different sample rate is an error.
AudioBuffer read_wav(const std::filesystem::path& path,
                     std::optional<double> expected_rate = std::nullopt);

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               WavEncoding encoding = WavEncoding::pcm16);

/// CSV with header `frame_index,time_s,f0_hz`; unvoiced rows carry 0.0.
void write_trajectory_csv(const std::filesystem::path& path, const F0Trajectory& traj);
F0Trajectory read_trajectory_csv(const std::filesystem::path& path);

/// Sine tone generator used by tests and the `gen-tone` command.
AudioBuffer make_tone(double freq_hz, double seconds, double sample_rate = 16000.0,
                      double amplitude = 0.5);

}  // namespace f0reg::dsp
