#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "f0reg/dsp/f0.hpp"
#include "f0reg/dsp/io.hpp"
#include "f0reg/dsp/pitch.hpp"
#include "f0reg/io_util.hpp"
#include "support.hpp"

using namespace f0reg;
using namespace f0reg::dsp;
using testsupport::Gen;

namespace {

double median_voiced(const F0Trajectory& t) {
  std::vector<double> v;
  for (double x : t.values)
    if (x > 0.0) v.push_back(x);
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double voiced_fraction(const F0Trajectory& t) {
  return static_cast<double>(t.voiced_count()) / static_cast<double>(t.size());
}

}  // namespace

// ---------------------------------------------------------------- tracker

TEST_CASE("pure 220 Hz tone") {
  const auto traj = extract_f0(make_tone(220.0, 1.0));
  CHECK(traj.size() == (16000 - 400) / 160 + 1);
  CHECK(voiced_fraction(traj) >= 0.95);
  CHECK(std::abs(median_voiced(traj) - 220.0) <= 2.0);
}

TEST_CASE("digital silence is unvoiced") {
  AudioBuffer silence{std::vector<double>(16000, 0.0), 16000.0};
  const auto traj = extract_f0(silence);
  CHECK(traj.voiced_count() == 0);
  for (double v : traj.values) CHECK(v == 0.0);
}

TEST_CASE("white noise is mostly unvoiced") {
  Gen g(31);
  AudioBuffer noise;
  noise.samples.resize(16000);
  for (auto& s : noise.samples) s = g.uniform(-0.5, 0.5);
  CHECK(1.0 - voiced_fraction(extract_f0(noise)) >= 0.80);
}

TEST_CASE("no octave errors on clean tones") {
  Gen g(32);
  const TrackerConfig cfg;
  for (int trial = 0; trial < 25; ++trial) {
    const double f = g.uniform(80.0, 350.0);
    const auto traj = extract_f0(make_tone(f, 0.5, 16000.0, g.uniform(0.05, 0.9)), cfg);
    std::size_t far = 0;
    for (double v : traj.values) {
      if (v == 0.0) continue;
      CHECK(v >= cfg.f_min);
      CHECK(v <= cfg.f_max);
      if (std::abs(v - f) > 0.1 * f) ++far;
    }
    REQUIRE(traj.voiced_count() > 0);
    CHECK(static_cast<double>(far) <= 0.02 * static_cast<double>(traj.voiced_count()));
  }
}

TEST_CASE("tracker works at other sample rates") {
  const auto traj = extract_f0(make_tone(150.0, 1.0, 8000.0));
  CHECK(voiced_fraction(traj) >= 0.95);
  CHECK(std::abs(median_voiced(traj) - 150.0) <= 2.0);
}

TEST_CASE("tracker errors") {
  CHECK_THROWS_AS(extract_f0(make_tone(220.0, 0.01)), ConfigError);  // shorter than a window
  TrackerConfig bad;
  bad.f_min = 400.0;
  bad.f_max = 60.0;
  CHECK_THROWS_AS(extract_f0(make_tone(220.0, 1.0), bad), ConfigError);
  TrackerConfig narrow;
  narrow.window = 0.005;  // cannot hold a 60 Hz period
  CHECK_THROWS_AS(extract_f0(make_tone(220.0, 1.0), narrow), ConfigError);
}

TEST_CASE("normalized difference dips at the period") {
  const auto tone = make_tone(200.0, 0.05);
  const auto d = normalized_difference(std::span(tone.samples).subspan(0, 400), 200);
  CHECK(d[0] == 1.0);
  // Deepest dip within the first period search range (lags 40..119).
  const auto best = std::min_element(d.begin() + 40, d.begin() + 120) - d.begin();
  CHECK(std::abs(static_cast<double>(best) - 80.0) <= 1.0);
  CHECK(d[80] < 0.05);
}

// ---------------------------------------------------------------- normalization

TEST_CASE("norm stats examples") {
  F0Trajectory flat;
  flat.values.assign(20, 100.0);
  const std::vector<F0Trajectory> one{flat};
  const auto s = compute_norm_stats(one);
  CHECK(s.mean_log == doctest::Approx(std::log(100.0)).epsilon(1e-15));
  CHECK(s.std_log == NormStats::kStdFloor);

  F0Trajectory two;
  two.values = {100.0, 0.0, std::numbers::e * 100.0};
  const auto s2 = compute_norm_stats(std::vector<F0Trajectory>{two});
  CHECK(s2.mean_log == doctest::Approx(std::log(100.0) + 0.5).epsilon(1e-14));
  CHECK(s2.std_log == doctest::Approx(0.5).epsilon(1e-13));

  F0Trajectory none;
  none.values.assign(5, 0.0);
  CHECK_THROWS_WITH_AS(compute_norm_stats(std::vector<F0Trajectory>{none}),
                       doctest::Contains("no voiced frames for normalization"),
                       InsufficientDataError);
  CHECK_THROWS_AS(compute_norm_stats(std::vector<F0Trajectory>{}), InsufficientDataError);
}

TEST_CASE("norm stats are permutation invariant") {
  Gen g(33);
  std::vector<F0Trajectory> trajs(6);
  for (auto& t : trajs) {
    t.values.resize(g.size(1, 50));
    for (auto& v : t.values) v = g.coin(0.3) ? 0.0 : g.uniform(70.0, 300.0);
  }
  trajs[0].values.push_back(120.0);
  const auto base = compute_norm_stats(trajs);
  for (int trial = 0; trial < 20; ++trial) {
    auto shuffled = trajs;
    std::shuffle(shuffled.begin(), shuffled.end(), g.rng);
    for (auto& t : shuffled) std::shuffle(t.values.begin(), t.values.end(), g.rng);
    const auto s = compute_norm_stats(shuffled);
    CHECK(testsupport::rel_diff(s.mean_log, base.mean_log) < 1e-12);
    CHECK(testsupport::rel_diff(s.std_log, base.std_log) < 1e-9);
  }
}

TEST_CASE("normalize and denormalize") {
  const NormStats s{4.7, 0.25};
  CHECK(normalize(200.0, s) == doctest::Approx(2.3932697).epsilon(1e-7));
  CHECK((std::log(200.0) - 4.7) / 0.25 == doctest::Approx(normalize(200.0, s)).epsilon(1e-15));
  CHECK(normalize(std::exp(4.7), s) == doctest::Approx(0.0));
  for (double x : {60.0, 110.0, 220.0, 400.0})
    CHECK(testsupport::rel_diff(denormalize(normalize(x, s), s), x) < 1e-9);
  CHECK_THROWS_AS(normalize(0.0, s), DomainError);
  CHECK_THROWS_AS(normalize(-5.0, s), DomainError);
}

TEST_CASE("normalization is strictly monotone") {
  Gen g(34);
  const NormStats s{5.0, 0.2};
  std::vector<double> xs;
  for (int i = 0; i < 2000; ++i) xs.push_back(std::exp(g.uniform(-5.0, 12.0)));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (std::size_t i = 1; i < xs.size(); ++i) CHECK(normalize(xs[i - 1], s) < normalize(xs[i], s));
}

TEST_CASE("voicing gate") {
  const NormStats s{std::log(150.0), 0.3};
  CHECK(gate_output(0.0, 0.6, s) == doctest::Approx(150.0).epsilon(1e-14));
  CHECK(gate_output(1.7, 0.4, s) == 0.0);
  CHECK(gate_output(1.7, 0.5, s) == 0.0);
  Gen g(35);
  for (int i = 0; i < 5000; ++i) {
    const double p = g.uniform(0.0, 1.0);
    const double out = gate_output(g.normal() * 3.0, p, s);
    CHECK(out >= 0.0);
    if (p <= 0.5) CHECK(out == 0.0);
  }
}

// ---------------------------------------------------------------- I/O

TEST_CASE("WAV round trips") {
  testsupport::ScratchDir dir("wav");
  const auto tone = make_tone(330.0, 0.2, 22050.0, 0.7);
  write_wav(dir / "f.wav", tone, WavEncoding::float32);
  const auto f = read_wav(dir / "f.wav");
  CHECK(f.sample_rate == 22050.0);
  REQUIRE(f.samples.size() == tone.samples.size());
  for (std::size_t i = 0; i < f.samples.size(); ++i)
    CHECK(f.samples[i] == static_cast<double>(static_cast<float>(tone.samples[i])));

  write_wav(dir / "p.wav", tone, WavEncoding::pcm16);
  const auto p = read_wav(dir / "p.wav", 22050.0);
  REQUIRE(p.samples.size() == tone.samples.size());
  for (std::size_t i = 0; i < p.samples.size(); ++i)
    CHECK(std::abs(p.samples[i] - tone.samples[i]) <= 0.5 / 32768.0);

  CHECK_THROWS_AS(read_wav(dir / "p.wav", 16000.0), ConfigError);
  CHECK_THROWS_AS(read_wav(dir / "missing.wav"), IoError);
  {
    std::ofstream junk(dir / "junk.wav", std::ios::binary);
    junk << "RIFF0000WAVEnope";
  }
  CHECK_THROWS_AS(read_wav(dir / "junk.wav"), IoError);
}

TEST_CASE("stereo WAV is rejected") {
  testsupport::ScratchDir dir("stereo");
  std::string buf = "RIFF";
  io::put<std::uint32_t>(buf, 36 + 8);
  buf += "WAVEfmt ";
  io::put<std::uint32_t>(buf, 16);
  io::put<std::uint16_t>(buf, 1);
  io::put<std::uint16_t>(buf, 2);
  io::put<std::uint32_t>(buf, 16000);
  io::put<std::uint32_t>(buf, 16000 * 4);
  io::put<std::uint16_t>(buf, 4);
  io::put<std::uint16_t>(buf, 16);
  buf += "data";
  io::put<std::uint32_t>(buf, 8);
  buf.append(8, '\0');
  {
    std::ofstream out(dir / "s.wav", std::ios::binary);
    out << buf;
  }
  CHECK_THROWS_WITH(read_wav(dir / "s.wav"), doctest::Contains("mono"));
}

TEST_CASE("trajectory CSV round trip") {
  testsupport::ScratchDir dir("traj");
  F0Trajectory t;
  t.values = {0.0, 101.25, 123.456789012, 0.0, 399.9};
  write_trajectory_csv(dir / "t.csv", t);
  const auto text = testsupport::slurp(dir / "t.csv");
  CHECK(text.rfind("frame_index,time_s,f0_hz\n", 0) == 0);
  CHECK(text.find("\n0,0.000000,0.0\n") != std::string::npos);
  const auto back = read_trajectory_csv(dir / "t.csv");
  REQUIRE(back.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    CHECK(testsupport::rel_diff(back.values[i], t.values[i]) < 1e-9);
  CHECK(back.hop == doctest::Approx(0.010));
}
