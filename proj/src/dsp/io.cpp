#include "f0reg/dsp/io.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "f0reg/io_util.hpp"

namespace f0reg::dsp {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path,
                     std::optional<double> expected_rate) {
  const auto data = io::read_file(path);
  io::ByteReader rd(data, path.string());
  if (rd.bytes(4, "RIFF tag") != "RIFF") throw IoError(path.string() + ": not a RIFF file");
  rd.get<std::uint32_t>("RIFF size");
  if (rd.bytes(4, "WAVE tag") != "WAVE") throw IoError(path.string() + ": not a WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  while (rd.remaining() >= 8) {
    const auto id = rd.bytes(4, "chunk id");
    const auto size = rd.get<std::uint32_t>("chunk size");
    const std::size_t body = rd.offset();
    if (id == "fmt ") {
      format = rd.get<std::uint16_t>("format tag");
      channels = rd.get<std::uint16_t>("channel count");
      rate = rd.get<std::uint32_t>("sample rate");
      rd.get<std::uint32_t>("byte rate");
      rd.get<std::uint16_t>("block align");
      bits = rd.get<std::uint16_t>("bits per sample");
      if (format == kFormatExtensible && size >= 40) {
        rd.get<std::uint16_t>("extension size");
        rd.get<std::uint16_t>("valid bits");
        rd.get<std::uint32_t>("channel mask");
        format = rd.get<std::uint16_t>("subformat");
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw IoError(path.string() + ": data chunk before fmt chunk");
      if (channels != 1)
        throw ConfigError(path.string() + ": expected mono audio, found " +
                          std::to_string(channels) + " channels");
      if (expected_rate && static_cast<double>(rate) != *expected_rate)
        throw ConfigError(path.string() + ": sample rate " + std::to_string(rate) +
                          " Hz does not match expected " +
                          std::to_string(static_cast<long>(*expected_rate)) + " Hz");
      AudioBuffer audio;
      audio.sample_rate = rate;
      rd.need(size, "sample data");
      if (format == kFormatPcm && bits == 16) {
        audio.samples.resize(size / 2);
        for (auto& s : audio.samples) s = rd.get<std::int16_t>("sample") / 32768.0;
      } else if (format == kFormatFloat && bits == 32) {
        audio.samples.resize(size / 4);
        for (auto& s : audio.samples) s = rd.get<float>("sample");
      } else {
        throw IoError(path.string() + ": unsupported encoding (format " +
                      std::to_string(format) + ", " + std::to_string(bits) + " bits)");
      }
      return audio;
    }
    rd.seek(body + size + (size & 1u), "chunk");
  }
  throw IoError(path.string() + ": no data chunk");
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               WavEncoding encoding) {
  const bool pcm = encoding == WavEncoding::pcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const auto rate = static_cast<std::uint32_t>(std::lround(audio.sample_rate));
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * bits / 8);
  std::string buf;
  buf += "RIFF";
  io::put<std::uint32_t>(buf, 36 + data_bytes);
  buf += "WAVEfmt ";
  io::put<std::uint32_t>(buf, 16);
  io::put<std::uint16_t>(buf, pcm ? kFormatPcm : kFormatFloat);
  io::put<std::uint16_t>(buf, 1);
  io::put<std::uint32_t>(buf, rate);
  io::put<std::uint32_t>(buf, rate * bits / 8);
  io::put<std::uint16_t>(buf, bits / 8);
  io::put<std::uint16_t>(buf, bits);
  buf += "data";
  io::put<std::uint32_t>(buf, data_bytes);
  for (double s : audio.samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    if (pcm)
      // Same scale as the reader; +1.0 saturates at the largest code.
      io::put<std::int16_t>(buf, static_cast<std::int16_t>(
                                     std::clamp(std::lround(c * 32768.0), -32768L, 32767L)));
    else
      io::put<float>(buf, static_cast<float>(c));
  }
  io::atomic_write(path, [&](std::ostream& os) { os.write(buf.data(), buf.size()); });
}

void write_trajectory_csv(const std::filesystem::path& path, const F0Trajectory& traj) {
  io::atomic_write(path, [&](std::ostream& os) {
    os << "frame_index,time_s,f0_hz\n";
    char line[96];
    for (std::size_t n = 0; n < traj.values.size(); ++n) {
      std::snprintf(line, sizeof line, "%zu,%.6f,", n, static_cast<double>(n) * traj.hop);
      os << line << io::format_hz(traj.values[n]) << '\n';
    }
  });
}

F0Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("frame_index,time_s,f0_hz", 0) != 0)
    throw IoError(path.string() + ": missing header frame_index,time_s,f0_hz");
  F0Trajectory traj;
  std::vector<double> times;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = io::split_csv_line(line);
    const std::string ctx = path.string() + ":" + std::to_string(lineno);
    if (f.size() != 3) throw IoError(ctx + ": expected 3 fields");
    times.push_back(io::parse_double(f[1], ctx));
    traj.values.push_back(io::parse_double(f[2], ctx));
  }
  if (times.size() >= 2) traj.hop = times[1] - times[0];
  return traj;
}

AudioBuffer make_tone(double freq_hz, double seconds, double sample_rate, double amplitude) {
  AudioBuffer audio;
  audio.sample_rate = sample_rate;
  const auto n = static_cast<std::size_t>(std::lround(seconds * sample_rate));
  audio.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    audio.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz *
                                            static_cast<double>(i) / sample_rate);
  return audio;
}

}  // namespace f0reg::dsp
