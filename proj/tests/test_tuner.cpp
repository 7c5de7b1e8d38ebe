#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "f0reg/data/synthetic.hpp"
#include "f0reg/tuner/objective.hpp"
#include "f0reg/tuner/study.hpp"
#include "support.hpp"

using namespace f0reg;
using namespace f0reg::tuner;

namespace {

double bowl(const Params& p) {
  const double a = std::log(p.lr) - std::log(7e-4);
  const double b = std::log(p.alpha) - std::log(2.2e-4);
  return a * a + b * b;
}

bool within_decade(double got, double want) { return std::abs(std::log10(got / want)) <= 1.0; }

}  // namespace

TEST_CASE("suggest") {
  SUBCASE("degenerate space returns the bound point") {
    SearchSpace s{{3e-4, 3e-4}, {0.01, 0.01}, {0.2, 0.2}};
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) CHECK(suggest(s, rng) == Params{3e-4, 0.01, 0.2});
  }
  SUBCASE("log-uniform median") {
    const SearchSpace s;
    std::mt19937_64 rng(2);
    std::vector<double> ln;
    for (int i = 0; i < 10000; ++i) ln.push_back(std::log(suggest(s, rng).lr));
    std::nth_element(ln.begin(), ln.begin() + 5000, ln.end());
    const double mid = 0.5 * (std::log(1e-5) + std::log(1e-2));
    CHECK(std::abs(ln[5000] - mid) <= 0.05 * std::abs(mid));
  }
  SUBCASE("same state, same draw") {
    const SearchSpace s;
    auto a = trial_rng(9, 3), b = trial_rng(9, 3);
    CHECK(suggest(s, a) == suggest(s, b));
    auto c = trial_rng(9, 4);
    auto d = trial_rng(9, 3);
    CHECK_FALSE(suggest(s, c) == suggest(s, d));
  }
  SUBCASE("draws stay inside the space") {
    testsupport::Gen g(61);
    for (int trial = 0; trial < 50; ++trial) {
      const double lo = std::exp(g.uniform(-12.0, -3.0));
      SearchSpace s{{lo, lo * std::exp(g.uniform(0.0, 5.0))},
                    {lo, lo * 10.0},
                    {g.uniform(0.0, 0.2), g.uniform(0.3, 0.9)}};
      std::mt19937_64 rng(trial);
      for (int i = 0; i < 200; ++i) {
        const auto p = suggest(s, rng);
        CHECK(s.contains(p));
        CHECK(p.lr >= s.lr.low);
        CHECK(p.lr <= s.lr.high);
      }
    }
  }
}

TEST_CASE("search space validation") {
  SearchSpace s;
  s.validate();
  s.lr = {1e-2, 1e-5};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = SearchSpace{};
  s.alpha = {0.0, 1.0};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = SearchSpace{};
  s.dropout_p = {0.0, 1.0};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK_THROWS_AS(run_study(bowl, SearchSpace{}, {0, 1, false}), ConfigError);
}

TEST_CASE("bowl study finds the centre") {
  const auto study = run_study(bowl, SearchSpace{}, {50, 17, false});
  REQUIRE(study.trials.size() == 50);
  CHECK(within_decade(study.best.params.lr, 7e-4));
  CHECK(within_decade(study.best.params.alpha, 2.2e-4));
  double running = INFINITY;
  for (const auto& t : study.trials) {
    CHECK(t.status == TrialStatus::complete);
    CHECK(study.best.objective <= t.objective);
    const double next = std::min(running, t.objective);
    CHECK(next <= running);
    running = next;
  }
  CHECK(running == study.best.objective);
  CHECK(study_csv(run_study(bowl, SearchSpace{}, {50, 17, false}).trials) == study_csv(study.trials));
}

TEST_CASE("bowl study succeeds across seeds") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto study = run_study(bowl, SearchSpace{}, {50, seed, false});
    CHECK(within_decade(study.best.params.lr, 7e-4));
    CHECK(within_decade(study.best.params.alpha, 2.2e-4));
  }
}

TEST_CASE("single trial study") {
  const auto study = run_study(bowl, SearchSpace{}, {1, 4, false});
  REQUIRE(study.trials.size() == 1);
  CHECK(study.best.trial_id == 0);
  CHECK(study.best.objective == study.trials[0].objective);
}

TEST_CASE("failed trials are excluded") {
  auto flaky = [](const Params& p) {
    if (p.dropout_p < 0.15) throw std::runtime_error("diverged");
    if (p.dropout_p < 0.3) return std::nan("");
    return bowl(p);
  };
  const auto study = run_study(flaky, SearchSpace{}, {40, 8, false});
  std::size_t failed = 0;
  for (const auto& t : study.trials) {
    if (t.status == TrialStatus::failed) {
      ++failed;
      CHECK(std::isnan(t.objective));
      CHECK(t.params.dropout_p < 0.3);
    } else {
      CHECK(study.best.objective <= t.objective);
    }
  }
  CHECK(failed > 0);
  CHECK(study.best.status == TrialStatus::complete);
  const auto csv = study_csv(study.trials);
  CHECK(csv.find(",nan,failed\n") != std::string::npos);
  CHECK(to_json(study.trials[0]).contains("status"));

  auto all_fail = [](const Params&) -> double { throw std::runtime_error("no"); };
  CHECK_THROWS_AS(run_study(all_fail, SearchSpace{}, {5, 1, false}), NumericalError);
}

TEST_CASE("parallel studies match serial ones") {
  const auto a = run_study(bowl, SearchSpace{}, {50, 23, false});
  const auto b = run_study(bowl, SearchSpace{}, {50, 23, true});
  CHECK(study_csv(a.trials) == study_csv(b.trials));
  CHECK(a.best.trial_id == b.best.trial_id);
  // The parameters of trial i do not depend on how many trials run.
  const auto c = run_study(bowl, SearchSpace{}, {10, 23, false});
  for (std::size_t i = 0; i < 10; ++i) CHECK(c.trials[i].params == a.trials[i].params);
}

TEST_CASE("study files") {
  testsupport::ScratchDir dir("study");
  const auto study = run_study(bowl, SearchSpace{}, {3, 5, false});
  write_study(study, dir / "s.csv", dir / "best.json");
  const auto csv = testsupport::slurp(dir / "s.csv");
  CHECK(csv.rfind("trial_id,lr,alpha,dropout_p,objective,status\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  const auto best = nlohmann::json::parse(testsupport::slurp(dir / "best.json"));
  CHECK(best["trial_id"] == study.best.trial_id);
  CHECK(best["lr"].get<double>() == study.best.params.lr);
  CHECK(best["objective"].get<double>() == study.best.objective);
}

TEST_CASE("training objective") {
  data::SyntheticSpec s;
  s.n_speakers = 2;
  s.utterances_per_speaker = 3;
  s.frames_per_utterance = 40;
  s.d_bn = 12;
  s.d_xv = 20;
  s.seed = 1;
  const auto corpus = data::gen_synthetic(s);
  nn::ModelConfig mc;
  mc.hidden = {8, 8, 8};
  training::TrainConfig base;
  base.batch_size = 64;
  base.seed = 3;
  const auto obj = training_objective(corpus, mc, base, 3);
  const Params p{1e-3, 1e-3, 0.1};
  const double v = obj(p);
  CHECK(std::isfinite(v));
  CHECK(v > 0.0);
  CHECK(obj(p) == v);
  const auto study = run_study(obj, SearchSpace{}, {3, 2, false});
  CHECK(study.best.status == TrialStatus::complete);
}
