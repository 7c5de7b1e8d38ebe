#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace f0reg::tuner {

struct Range {
  double low = 0.0;
  double high = 0.0;
};

struct Params {
  double lr = 0.0;
  double alpha = 0.0;
  double dropout_p = 0.0;
  bool operator==(const Params&) const = default;
};

/// lr and alpha are searched on a log scale, dropout linearly.
struct SearchSpace {
  Range lr{1e-5, 1e-2};
  Range alpha{1e-5, 1e-1};
  Range dropout_p{0.0, 0.5};

  void validate() const;
  bool contains(const Params& p) const;
};

enum class TrialStatus { complete, failed };

struct Trial {
  std::size_t trial_id = 0;
  Params params;
  double objective = 0.0;  // NaN for failed trials
  TrialStatus status = TrialStatus::failed;
};

struct StudyResult {
  Trial best;
  std::vector<Trial> trials;
};

using Objective = std::function<double(const Params&)>;

/// Draws one point; the sampler consumes exactly three uniforms.
Params suggest(const SearchSpace& space, std::mt19937_64& rng);

/// Generator for trial `trial_id`; parameters depend only on (seed, trial_id).
std::mt19937_64 trial_rng(std::uint64_t seed, std::size_t trial_id);

struct StudyOptions {
  std::size_t n_trials = 50;
  std::uint64_t seed = 0;
  // Evaluate trials concurrently. The objective must then be thread-safe;
  // results are identical to serial execution.
  bool parallel = false;
};

/// Random search. Objectives that throw or return NaN/Inf mark the trial
/// failed. Throws if every trial failed.
StudyResult run_study(const Objective& objective, const SearchSpace& space,
                      const StudyOptions& options);

/// `trial_id,lr,alpha,dropout_p,objective,status`
std::string study_csv(std::span<const Trial> trials);
nlohmann::json to_json(const Trial& t);
void write_study(const StudyResult& study, const std::filesystem::path& csv_path,
                 const std::filesystem::path& best_json_path);

}  // namespace f0reg::tuner
