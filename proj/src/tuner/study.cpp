#include "f0reg/tuner/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "f0reg/error.hpp"
#include "f0reg/io_util.hpp"
#include "f0reg/random.hpp"

namespace f0reg::tuner {

namespace {

void check_range(const Range& r, const char* name, bool positive) {
  if (!(r.low <= r.high)) throw ConfigError(std::string(name) + ": low bound exceeds high bound");
  if (positive && !(r.low > 0.0)) throw ConfigError(std::string(name) + ": bounds must be > 0");
  if (!std::isfinite(r.low) || !std::isfinite(r.high))
    throw ConfigError(std::string(name) + ": bounds must be finite");
}

// Exact at both ends of the unit interval so degenerate ranges return the bound.
double lerp(double a, double b, double u) { return a == b ? a : a + (b - a) * u; }

double log_uniform(const Range& r, double u) {
  if (r.low == r.high) return r.low;
  return std::exp(lerp(std::log(r.low), std::log(r.high), u));
}

const char* status_name(TrialStatus s) {
  return s == TrialStatus::complete ? "complete" : "failed";
}

}  // namespace

void SearchSpace::validate() const {
  check_range(lr, "lr", true);
  check_range(alpha, "alpha", true);
  check_range(dropout_p, "dropout_p", false);
  if (dropout_p.low < 0.0 || dropout_p.high >= 1.0)
    throw ConfigError("dropout_p: bounds must lie in [0, 1)");
}

bool SearchSpace::contains(const Params& p) const {
  // Log-scale sampling can round one ulp past a bound.
  auto in = [](const Range& r, double v, bool logscale) {
    const double slack = logscale ? 1e-12 * r.high : 0.0;
    return v >= r.low - slack && v <= r.high + slack;
  };
  return in(lr, p.lr, true) && in(alpha, p.alpha, true) && in(dropout_p, p.dropout_p, false);
}

Params suggest(const SearchSpace& space, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double u_lr = u(rng), u_alpha = u(rng), u_p = u(rng);
  Params p;
  p.lr = std::clamp(log_uniform(space.lr, u_lr), space.lr.low, space.lr.high);
  p.alpha = std::clamp(log_uniform(space.alpha, u_alpha), space.alpha.low, space.alpha.high);
  p.dropout_p = lerp(space.dropout_p.low, space.dropout_p.high, u_p);
  return p;
}

std::mt19937_64 trial_rng(std::uint64_t seed, std::size_t trial_id) {
  return std::mt19937_64(derive_seed(seed, {trial_id}));
}

StudyResult run_study(const Objective& objective, const SearchSpace& space,
                      const StudyOptions& options) {
  space.validate();
  if (options.n_trials < 1) throw ConfigError("n_trials must be >= 1");
  StudyResult study;
  study.trials.resize(options.n_trials);
  for (std::size_t i = 0; i < options.n_trials; ++i) {
    auto rng = trial_rng(options.seed, i);
    study.trials[i].trial_id = i;
    study.trials[i].params = suggest(space, rng);
  }

  auto run_one = [&](Trial& t) {
    try {
      const double v = objective(t.params);
      if (std::isfinite(v)) {
        t.objective = v;
        t.status = TrialStatus::complete;
        return;
      }
    } catch (const std::exception&) {
    }
    t.objective = std::numeric_limits<double>::quiet_NaN();
    t.status = TrialStatus::failed;
  };

  const auto n = static_cast<std::ptrdiff_t>(options.n_trials);
  if (options.parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) run_one(study.trials[static_cast<std::size_t>(i)]);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) run_one(study.trials[static_cast<std::size_t>(i)]);
  }

  const Trial* best = nullptr;
  for (const auto& t : study.trials)
    if (t.status == TrialStatus::complete && (!best || t.objective < best->objective)) best = &t;
  if (!best) throw NumericalError("all " + std::to_string(options.n_trials) + " trials failed");
  study.best = *best;
  return study;
}

std::string study_csv(std::span<const Trial> trials) {
  std::string out = "trial_id,lr,alpha,dropout_p,objective,status\n";
  char line[192];
  for (const auto& t : trials) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g,%s\n", t.trial_id,
                  t.params.lr, t.params.alpha, t.params.dropout_p, t.objective,
                  status_name(t.status));
    out += line;
  }
  return out;
}

nlohmann::json to_json(const Trial& t) {
  return {{"trial_id", t.trial_id},
          {"lr", t.params.lr},
          {"alpha", t.params.alpha},
          {"dropout_p", t.params.dropout_p},
          {"objective", t.status == TrialStatus::complete ? nlohmann::json(t.objective)
                                                          : nlohmann::json(nullptr)},
          {"status", status_name(t.status)}};
}

void write_study(const StudyResult& study, const std::filesystem::path& csv_path,
                 const std::filesystem::path& best_json_path) {
  const std::string csv = study_csv(study.trials);
  const std::string best = to_json(study.best).dump(2) + "\n";
  io::atomic_write(csv_path, [&](std::ostream& os) { os << csv; });
  io::atomic_write(best_json_path, [&](std::ostream& os) { os << best; });
}

}  // namespace f0reg::tuner
