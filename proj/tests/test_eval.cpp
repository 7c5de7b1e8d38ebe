#include "doctest.h"

#include <cmath>

#include "f0reg/data/synthetic.hpp"
#include "f0reg/eval/metrics.hpp"
#include "f0reg/nn/bundle.hpp"
#include "support.hpp"

using namespace f0reg;
using namespace f0reg::eval;
using testsupport::Gen;

namespace {

dsp::F0Trajectory traj(std::vector<double> v) {
  dsp::F0Trajectory t;
  t.values = std::move(v);
  return t;
}

// Two-pass Pearson in long double over mutually voiced frames.
double pearson_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  long double ma = 0, mb = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > 0 && b[i] > 0) {
      ma += a[i];
      mb += b[i];
      ++n;
    }
  ma /= n;
  mb /= n;
  long double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > 0 && b[i] > 0) {
      sab += (a[i] - ma) * (b[i] - mb);
      saa += (a[i] - ma) * (a[i] - ma);
      sbb += (b[i] - mb) * (b[i] - mb);
    }
  return static_cast<double>(sab / std::sqrt(saa * sbb));
}

data::Corpus tiny_corpus(double duty = 0.7) {
  data::SyntheticSpec s;
  s.n_speakers = 2;
  s.utterances_per_speaker = 3;
  s.frames_per_utterance = 40;
  s.d_bn = 12;
  s.d_xv = 20;
  s.duty_cycle = duty;
  s.seed = 8;
  return data::gen_synthetic(s);
}

training::TrainedBundle random_bundle(std::size_t input_dim) {
  nn::ModelConfig mc;
  mc.input_dim = input_dim;
  mc.hidden = {8, 8, 8};
  training::TrainedBundle b;
  b.model = nn::init_model(mc, 4);
  b.model.layer(3).bias()[nn::kVoicingHead] = 3.0;
  b.stats = {std::log(150.0), 0.3};
  return b;
}

}  // namespace

TEST_CASE("pitch correlation examples") {
  const std::vector<double> x{100, 120, 140, 160, 180};
  CHECK(pitch_correlation(traj(x), traj(x)) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> scaled;
  for (double v : x) scaled.push_back(2.0 * v);
  CHECK(pitch_correlation(traj(x), traj(scaled)) == doctest::Approx(1.0).epsilon(1e-12));

  // Sab = 550, Saa = 500, Sbb = 875.
  const std::vector<double> a4{100, 110, 120, 130}, b4{100, 120, 110, 140};
  const double exact = 550.0 / std::sqrt(500.0 * 875.0);
  CHECK(exact == doctest::Approx(0.83152).epsilon(1e-5));
  CHECK(pitch_correlation(traj(a4), traj(b4)) == doctest::Approx(exact).epsilon(1e-12));
  CHECK(pitch_correlation(traj(a4), traj(b4)) == doctest::Approx(0.80).epsilon(0.05));

  // Unvoiced frames on either side are ignored.
  auto xa = a4, ya = b4;
  xa.insert(xa.begin() + 2, 0.0);
  ya.insert(ya.begin() + 2, 300.0);
  xa.push_back(250.0);
  ya.push_back(0.0);
  CHECK(pitch_correlation(traj(xa), traj(ya)) == doctest::Approx(exact).epsilon(1e-12));

  CHECK(pitch_correlation(traj({100, 100, 100}), traj({90, 120, 130})) == 0.0);
  CHECK_THROWS_WITH_AS(pitch_correlation(traj({100, 0, 0}), traj({100, 110, 0})),
                       doctest::Contains("insufficient overlap"), InsufficientDataError);
  CHECK_THROWS_AS(pitch_correlation(traj({100, 110}), traj({100})), ShapeError);
}

TEST_CASE("pitch correlation properties") {
  Gen g(71);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = g.size(3, 60);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = g.coin(0.2) ? 0.0 : g.uniform(60.0, 400.0);
      b[i] = g.coin(0.2) ? 0.0 : g.uniform(60.0, 400.0);
    }
    a[0] = 100; b[0] = 120; a[1] = 200; b[1] = 130;
    const double r = pitch_correlation(traj(a), traj(b));
    CHECK(r >= -1.0);
    CHECK(r <= 1.0);
    CHECK(r == doctest::Approx(pearson_oracle(a, b)).epsilon(1e-9));
    CHECK(pitch_correlation(traj(b), traj(a)) == doctest::Approx(r).epsilon(1e-12));
    // Positive affine maps of one side leave the value unchanged.
    const double k = g.uniform(0.5, 3.0), c = g.uniform(0.0, 50.0);
    auto a2 = a;
    for (auto& v : a2)
      if (v > 0) v = k * v + c;
    CHECK(pitch_correlation(traj(a2), traj(b)) == doctest::Approx(r).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("voicing metrics") {
  const auto m = voicing_metrics(traj({100, 100, 0, 0}), traj({100, 0, 0, 100}));
  CHECK(m.accuracy == 0.5);
  CHECK(m.precision == 0.5);
  CHECK(m.recall == 0.5);
  CHECK(m.f1 == 0.5);
  CHECK(m.tp == 1);
  CHECK(m.fp == 1);
  CHECK(m.tn == 1);
  CHECK(m.fn == 1);
  const auto none = voicing_metrics(traj({0, 0}), traj({0, 0}));
  CHECK(none.accuracy == 1.0);
  CHECK(none.precision == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK_THROWS_AS(voicing_metrics(traj({0}), traj({0, 0})), ShapeError);

  Gen g(72);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = g.size(1, 40);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = g.coin(0.5) ? 0.0 : 100.0;
      b[i] = g.coin(0.5) ? 0.0 : 100.0;
    }
    const auto v = voicing_metrics(traj(a), traj(b));
    CHECK(v.tp + v.tn + v.fp + v.fn == n);
    for (double x : {v.accuracy, v.precision, v.recall, v.f1}) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    }
  }
}

TEST_CASE("evaluate with an oracle predictor") {
  const auto corpus = tiny_corpus();
  const auto oracle = [](const data::UtteranceRecord& u) { return u.f0; };
  const auto r = evaluate(oracle, corpus);
  CHECK(r.rho_f0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.voicing.f1 == 1.0);
  CHECK(r.voicing.accuracy == 1.0);
  CHECK(r.rmse_hz == 0.0);
  CHECK(r.rmse_log == 0.0);
  CHECK(r.n_utterances == corpus.size());
  CHECK(r.n_skipped == 0);
  const auto j = to_json(r);
  CHECK(j["voicing"]["f1"] == 1.0);

  const std::span<const data::UtteranceRecord> one(corpus.data(), 1);
  const auto single = evaluate(oracle, one);
  CHECK(single.n_utterances == 1);
  CHECK(single.rho_f0 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("evaluate aggregation") {
  const auto corpus = tiny_corpus();
  // Constant 10 Hz offset: rho stays 1, pooled RMSE is exactly the offset.
  const auto shifted = [](const data::UtteranceRecord& u) {
    auto t = u.f0;
    for (auto& v : t.values)
      if (v > 0) v += 10.0;
    return t;
  };
  const auto r = evaluate(shifted, corpus);
  CHECK(r.rmse_hz == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(r.rho_f0 == doctest::Approx(1.0).epsilon(1e-9));

  const auto silent = [](const data::UtteranceRecord& u) {
    auto t = u.f0;
    std::fill(t.values.begin(), t.values.end(), 0.0);
    return t;
  };
  CHECK_THROWS_AS(evaluate(silent, corpus), InsufficientDataError);
  CHECK_THROWS_AS(evaluate(shifted, std::span<const data::UtteranceRecord>{}), InsufficientDataError);

  // One utterance without overlap is skipped, not fatal.
  const std::string skip_id = corpus[1].utt_id;
  const auto partial = [&](const data::UtteranceRecord& u) {
    return u.utt_id == skip_id ? silent(u) : u.f0;
  };
  const auto p = evaluate(partial, corpus);
  CHECK(p.n_skipped == 1);
  CHECK(p.n_utterances == corpus.size() - 1);
}

TEST_CASE("swap experiment") {
  const auto corpus = tiny_corpus();
  const auto bundle = random_bundle(32);
  const auto& src = corpus[0];
  const auto self = swap_experiment(bundle, src, src.xvec, src.speaker_id);
  const auto direct = training::predict_utterance(bundle, src.bn, src.xvec);
  CHECK(self.predicted.values == direct.values);
  CHECK(self.source_utt_id == src.utt_id);
  CHECK(self.voicing_agreement >= 0.0);
  CHECK(self.voicing_agreement <= 1.0);

  // Hand oracle for the shift and the agreement.
  double sp = 0, st = 0;
  std::size_t np = 0, nt = 0, agree = 0;
  for (std::size_t t = 0; t < src.frames(); ++t) {
    const double p = direct.values[t], y = src.f0.values[t];
    if (p > 0) { sp += p; ++np; }
    if (y > 0) { st += y; ++nt; }
    agree += (p > 0) == (y > 0);
  }
  REQUIRE(self.voiced_mean_shift_hz.has_value());
  CHECK(*self.voiced_mean_shift_hz == doctest::Approx(sp / np - st / nt).epsilon(1e-12));
  CHECK(self.voicing_agreement == doctest::Approx(double(agree) / src.frames()));

  const auto other = swap_experiment(bundle, src, corpus[3].xvec, corpus[3].speaker_id);
  CHECK(other.donor_speaker_id == "spk001");
  const auto j = to_json(other);
  CHECK(j["frames"] == src.frames());
  CHECK(j.contains("voiced_mean_shift_hz"));

  const auto unvoiced = tiny_corpus(0.0);
  const auto r = swap_experiment(bundle, unvoiced[0], unvoiced[0].xvec, "spk000");
  CHECK_FALSE(r.voiced_mean_shift_hz.has_value());
  CHECK_FALSE(r.rho_vs_source.has_value());
  CHECK(r.issue.find("insufficient overlap") != std::string::npos);
  CHECK(to_json(r)["voiced_mean_shift_hz"].is_null());

  CHECK_THROWS_AS(swap_experiment(bundle, src, std::vector<float>(3), "x"), ShapeError);
}

TEST_CASE("speaker mean F0") {
  const auto corpus = tiny_corpus();
  double s = 0;
  std::size_t n = 0;
  for (const auto& u : corpus)
    if (u.speaker_id == "spk001")
      for (double v : u.f0.values)
        if (v > 0) { s += v; ++n; }
  CHECK(speaker_mean_f0(corpus, "spk001") == doctest::Approx(s / n).epsilon(1e-12));
  CHECK_THROWS_AS(speaker_mean_f0(corpus, "nobody"), InsufficientDataError);
}

TEST_CASE("trajectory export") {
  testsupport::ScratchDir dir("export");
  const std::vector<std::pair<std::string, dsp::F0Trajectory>> items{
      {"ground_truth", traj({0.0, 120.5, 130.25})}, {"swapped", traj({0.0, 220.0, 0.0})}};
  export_trajectories_csv(items, dir / "t.csv");
  const auto text = testsupport::slurp(dir / "t.csv");
  CHECK(text ==
        "label,frame_index,time_s,f0_hz\n"
        "ground_truth,0,0.000000,0.0\n"
        "ground_truth,1,0.010000,120.5\n"
        "ground_truth,2,0.020000,130.25\n"
        "swapped,0,0.000000,0.0\n"
        "swapped,1,0.010000,220\n"
        "swapped,2,0.020000,0.0\n");
  const auto back = read_trajectories_csv(dir / "t.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].first == "ground_truth");
  CHECK(back[0].second.values == items[0].second.values);
  CHECK(back[1].second.values == items[1].second.values);

  const std::vector<std::pair<std::string, dsp::F0Trajectory>> bad{{"a,b", traj({1.0})}};
  CHECK_THROWS_AS(export_trajectories_csv(bad, dir / "bad.csv"), ConfigError);
  CHECK_THROWS_AS(read_trajectories_csv(dir / "missing.csv"), IoError);
}
