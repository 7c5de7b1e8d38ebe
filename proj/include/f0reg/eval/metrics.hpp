#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "f0reg/data/corpus.hpp"
#include "f0reg/dsp/f0.hpp"
#include "f0reg/training/trainer.hpp"

namespace f0reg::eval {

/// Pearson correlation of Hz values over frames voiced in both trajectories.
/// Zero variance on either side gives 0.0. Throws InsufficientDataError
/// ("insufficient overlap") with fewer than two such frames.
double pitch_correlation(const dsp::F0Trajectory& a, const dsp::F0Trajectory& b);

struct VoicingMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
};

/// Voiced is the positive class; undefined ratios are 0.
VoicingMetrics voicing_metrics(const dsp::F0Trajectory& pred, const dsp::F0Trajectory& truth);

struct EvalReport {
  double rho_f0 = 0.0;  // mean per-utterance correlation
  VoicingMetrics voicing;  // means of per-utterance rates
  double rmse_hz = 0.0;    // pooled over mutually voiced frames
  double rmse_log = 0.0;
  std::size_t n_utterances = 0;
  std::size_t n_skipped = 0;  // fewer than two mutually voiced frames
};

nlohmann::json to_json(const EvalReport& r);

using Predictor = std::function<dsp::F0Trajectory(const data::UtteranceRecord&)>;

/// Aggregates in utt_id order.
EvalReport evaluate(const Predictor& predict, std::span<const data::UtteranceRecord> corpus);
EvalReport evaluate(const training::TrainedBundle& bundle,
                    std::span<const data::UtteranceRecord> corpus);

struct SwapResult {
  std::string source_utt_id;
  std::string donor_speaker_id;
  dsp::F0Trajectory predicted;
  // Mean predicted voiced F0 minus mean ground-truth voiced F0 of the source.
  // Empty when either side has no voiced frame; `issue` then says why.
  std::optional<double> voiced_mean_shift_hz;
  std::optional<double> rho_vs_source;
  double voicing_agreement = 0.0;
  std::string issue;
};

nlohmann::json to_json(const SwapResult& r);

/// Predicts F0 from the source utterance's features and a donor embedding.
SwapResult swap_experiment(const training::TrainedBundle& bundle,
                           const data::UtteranceRecord& source, std::span<const float> donor_xvec,
                           const std::string& donor_speaker_id);

/// Mean voiced ground-truth F0 over all utterances of a speaker.
double speaker_mean_f0(std::span<const data::UtteranceRecord> corpus, const std::string& speaker_id);

/// Long format `label,frame_index,time_s,f0_hz`.
void export_trajectories_csv(std::span<const std::pair<std::string, dsp::F0Trajectory>> items,
                             const std::filesystem::path& path);
std::vector<std::pair<std::string, dsp::F0Trajectory>> read_trajectories_csv(
    const std::filesystem::path& path);

}  // namespace f0reg::eval
