#include "f0reg/data/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "f0reg/random.hpp"

namespace f0reg::data {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMeanCycleFrames = 40.0;

enum Stream : std::uint64_t { kRegister = 1, kEmbedding = 2, kUtterance = 3 };

std::string speaker_name(std::size_t s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "spk%03zu", s);
  return buf;
}

std::vector<double> make_contour(std::size_t frames, double amplitude, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(2, 4);
  std::uniform_real_distribution<double> cycles(0.5, 3.0);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::uniform_real_distribution<double> weight(0.5, 1.0);
  const int k = count(rng);
  std::vector<double> w(static_cast<std::size_t>(k)), f(w.size()), ph(w.size());
  double wsum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = weight(rng);
    f[i] = cycles(rng);
    ph[i] = phase(rng);
    wsum += w[i];
  }
  std::vector<double> c(frames, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    const double x = static_cast<double>(t) / static_cast<double>(frames);
    for (std::size_t i = 0; i < w.size(); ++i)
      c[t] += amplitude * (w[i] / wsum) * std::sin(kTwoPi * f[i] * x + ph[i]);
  }
  return c;
}

// Alternating unvoiced/voiced runs whose lengths average the duty cycle.
std::vector<char> make_voicing(std::size_t frames, double duty, std::mt19937_64& rng) {
  std::vector<char> v(frames, 0);
  if (duty >= 1.0) {
    std::fill(v.begin(), v.end(), 1);
    return v;
  }
  if (duty <= 0.0) return v;
  std::uniform_real_distribution<double> jitter(0.5, 1.5);
  std::size_t t = 0;
  while (t < frames) {
    auto unv = static_cast<std::size_t>(std::lround(kMeanCycleFrames * (1.0 - duty) * jitter(rng)));
    auto voi = static_cast<std::size_t>(std::lround(kMeanCycleFrames * duty * jitter(rng)));
    if (unv + voi == 0) unv = 1;
    t += unv;
    for (std::size_t i = 0; i < voi && t < frames; ++i, ++t) v[t] = 1;
  }
  return v;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n_speakers < 1) throw ConfigError("n_speakers must be >= 1");
  if (utterances_per_speaker < 1) throw ConfigError("utterances_per_speaker must be >= 1");
  if (frames_per_utterance < 1) throw ConfigError("frames_per_utterance must be >= 1");
  if (!(register_low_hz > 0.0 && register_high_hz > 0.0))
    throw ConfigError("register means must be > 0 Hz");
  if (!(register_spread_hz >= 0.0) ||
      !(register_spread_hz < std::min(register_low_hz, register_high_hz)))
    throw ConfigError("register_spread_hz must lie in [0, register mean)");
  if (!(contour_semitones >= 0.0)) throw ConfigError("contour_semitones must be >= 0");
  if (!(duty_cycle >= 0.0 && duty_cycle <= 1.0))
    throw ConfigError("duty_cycle must lie in [0, 1]");
  if (!(noise_semitones >= 0.0)) throw ConfigError("noise_semitones must be >= 0");
  if (!(bn_noise >= 0.0)) throw ConfigError("bn_noise must be >= 0");
  if (d_bn < kMinBnDim) throw ConfigError("d_bn must be >= " + std::to_string(kMinBnDim));
  if (d_xv < kRegisterBlock)
    throw ConfigError("d_xv must be >= " + std::to_string(kRegisterBlock));
}

double speaker_register_hz(const SyntheticSpec& spec, std::size_t speaker) {
  std::mt19937_64 rng(derive_seed(spec.seed, {kRegister, speaker}));
  std::uniform_real_distribution<double> spread(-spec.register_spread_hz,
                                                spec.register_spread_hz);
  const double centre = speaker % 2 == 0 ? spec.register_low_hz : spec.register_high_hz;
  return centre + spread(rng);
}

Corpus gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Corpus corpus;
  corpus.reserve(spec.n_speakers * spec.utterances_per_speaker);
  const std::size_t T = spec.frames_per_utterance;
  for (std::size_t s = 0; s < spec.n_speakers; ++s) {
    const double mu = speaker_register_hz(spec, s);

    std::vector<float> xvec(spec.d_xv, 0.0f);
    {
      std::mt19937_64 rng(derive_seed(spec.seed, {kEmbedding, s}));
      std::normal_distribution<double> g(0.0, 1.0);
      std::vector<double> dir(spec.d_xv - kRegisterBlock);
      double norm = 0.0;
      for (auto& d : dir) {
        d = g(rng);
        norm += d * d;
      }
      norm = std::sqrt(norm);
      const double code = std::log(mu / kRegisterPivotHz);
      for (std::size_t i = 0; i < kRegisterBlock; ++i) xvec[i] = static_cast<float>(code);
      for (std::size_t i = 0; i < dir.size(); ++i)
        xvec[kRegisterBlock + i] = static_cast<float>(norm > 0.0 ? dir[i] / norm : 0.0);
    }

    for (std::size_t k = 0; k < spec.utterances_per_speaker; ++k) {
      std::mt19937_64 rng(derive_seed(spec.seed, {kUtterance, s, k}));
      std::normal_distribution<double> eps(0.0, 1.0);
      const auto contour = make_contour(T, spec.contour_semitones, rng);
      const auto voiced = make_voicing(T, spec.duty_cycle, rng);

      UtteranceRecord u;
      u.speaker_id = speaker_name(s);
      char id[48];
      std::snprintf(id, sizeof id, "%s-utt%03zu", u.speaker_id.c_str(), k);
      u.utt_id = id;
      u.xvec = xvec;
      u.bn = FloatMatrix(T, spec.d_bn);
      u.f0.values.assign(T, 0.0);
      for (std::size_t t = 0; t < T; ++t) {
        if (voiced[t]) {
          const double semis = contour[t] + spec.noise_semitones * eps(rng);
          // Stored at 32-bit precision so the container round trip is exact.
          u.f0.values[t] = static_cast<float>(mu * std::exp2(semis / 12.0));
        }
        auto row = u.bn.row(t);
        const double x = static_cast<double>(t) / static_cast<double>(T);
        row[kContourChannel] = static_cast<float>(contour[t]);
        // Signed code: an all-zero flag would leave unvoiced rows without any
        // direct contribution to the first layer.
        row[kVoicingChannel] = voiced[t] ? 1.0f : -1.0f;
        for (std::size_t p = 0; p < kPositionalPairs; ++p) {
          const double arg = kTwoPi * static_cast<double>(p + 1) * x;
          row[2 + 2 * p] = static_cast<float>(std::sin(arg));
          row[3 + 2 * p] = static_cast<float>(std::cos(arg));
        }
        if (spec.bn_noise > 0.0)
          for (auto& v : row) v = static_cast<float>(v + spec.bn_noise * eps(rng));
      }
      corpus.push_back(std::move(u));
    }
  }
  return corpus;
}

nlohmann::json to_json(const SyntheticSpec& s) {
  return {{"n_speakers", s.n_speakers},
          {"utterances_per_speaker", s.utterances_per_speaker},
          {"frames_per_utterance", s.frames_per_utterance},
          {"register_low_hz", s.register_low_hz},
          {"register_high_hz", s.register_high_hz},
          {"register_spread_hz", s.register_spread_hz},
          {"contour_semitones", s.contour_semitones},
          {"duty_cycle", s.duty_cycle},
          {"noise_semitones", s.noise_semitones},
          {"bn_noise", s.bn_noise},
          {"d_bn", s.d_bn},
          {"d_xv", s.d_xv}};
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("synthetic spec must be a JSON object");
  SyntheticSpec s;
  for (const auto& [key, v] : j.items()) {
    try {
      // Counts are read as signed so that negative values get a clear message.
      auto count = [&] {
        const auto n = v.get<long long>();
        if (n < 0) throw ConfigError("synthetic spec key '" + key + "' must be >= 0");
        return static_cast<std::size_t>(n);
      };
      if (key == "n_speakers") s.n_speakers = count();
      else if (key == "utterances_per_speaker") s.utterances_per_speaker = count();
      else if (key == "frames_per_utterance") s.frames_per_utterance = count();
      else if (key == "register_low_hz") s.register_low_hz = v.get<double>();
      else if (key == "register_high_hz") s.register_high_hz = v.get<double>();
      else if (key == "register_spread_hz") s.register_spread_hz = v.get<double>();
      else if (key == "contour_semitones") s.contour_semitones = v.get<double>();
      else if (key == "duty_cycle") s.duty_cycle = v.get<double>();
      else if (key == "noise_semitones") s.noise_semitones = v.get<double>();
      else if (key == "bn_noise") s.bn_noise = v.get<double>();
      else if (key == "d_bn") s.d_bn = count();
      else if (key == "d_xv") s.d_xv = count();
      else if (key == "seed")
        throw ConfigError("synthetic spec key 'seed' is not allowed; pass --seed");
      else throw ConfigError("unknown synthetic spec key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("synthetic spec key '" + key + "': " + e.what());
    }
  }
  s.validate();
  return s;
}

}  // namespace f0reg::data
