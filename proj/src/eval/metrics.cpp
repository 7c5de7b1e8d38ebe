#include "f0reg/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include "f0reg/io_util.hpp"

namespace f0reg::eval {

using nlohmann::json;

namespace {

void require_same_length(const dsp::F0Trajectory& a, const dsp::F0Trajectory& b, const char* what) {
  require_shape(a.size() == b.size(), std::string(what) + ": trajectory lengths differ (" +
                                          std::to_string(a.size()) + " vs " +
                                          std::to_string(b.size()) + ")");
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

struct UttScore {
  std::string utt_id;
  bool skipped = false;
  double rho = 0.0;
  VoicingMetrics voicing;
  double sq_hz = 0.0, sq_log = 0.0;
  std::size_t n_mutual = 0;
};

UttScore score_utterance(const data::UtteranceRecord& u, const dsp::F0Trajectory& pred) {
  UttScore s;
  s.utt_id = u.utt_id;
  s.voicing = voicing_metrics(pred, u.f0);
  for (std::size_t t = 0; t < pred.size(); ++t) {
    if (pred.values[t] > 0.0 && u.f0.values[t] > 0.0) {
      const double d = pred.values[t] - u.f0.values[t];
      const double dl = std::log(pred.values[t]) - std::log(u.f0.values[t]);
      s.sq_hz += d * d;
      s.sq_log += dl * dl;
      ++s.n_mutual;
    }
  }
  try {
    s.rho = pitch_correlation(pred, u.f0);
  } catch (const InsufficientDataError&) {
    s.skipped = true;
  }
  return s;
}

}  // namespace

double pitch_correlation(const dsp::F0Trajectory& a, const dsp::F0Trajectory& b) {
  require_same_length(a, b, "pitch_correlation");
  std::vector<double> xa, xb;
  for (std::size_t t = 0; t < a.size(); ++t)
    if (a.values[t] > 0.0 && b.values[t] > 0.0) {
      xa.push_back(a.values[t]);
      xb.push_back(b.values[t]);
    }
  if (xa.size() < 2) throw InsufficientDataError("insufficient overlap");
  const double n = static_cast<double>(xa.size());
  const double ma = std::accumulate(xa.begin(), xa.end(), 0.0) / n;
  const double mb = std::accumulate(xb.begin(), xb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < xa.size(); ++i) {
    const double da = xa[i] - ma, db = xb[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

VoicingMetrics voicing_metrics(const dsp::F0Trajectory& pred, const dsp::F0Trajectory& truth) {
  require_same_length(pred, truth, "voicing_metrics");
  VoicingMetrics m;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    const bool p = pred.values[t] > 0.0, y = truth.values[t] > 0.0;
    if (p && y) ++m.tp;
    else if (!p && !y) ++m.tn;
    else if (p) ++m.fp;
    else ++m.fn;
  }
  m.accuracy = ratio(m.tp + m.tn, pred.size());
  m.precision = ratio(m.tp, m.tp + m.fp);
  m.recall = ratio(m.tp, m.tp + m.fn);
  m.f1 = (m.precision > 0.0 && m.recall > 0.0)
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

json to_json(const EvalReport& r) {
  return {{"rho_f0", r.rho_f0},
          {"voicing",
           {{"accuracy", r.voicing.accuracy},
            {"precision", r.voicing.precision},
            {"recall", r.voicing.recall},
            {"f1", r.voicing.f1}}},
          {"rmse_hz", r.rmse_hz},
          {"rmse_log", r.rmse_log},
          {"n_utterances", r.n_utterances},
          {"n_skipped", r.n_skipped}};
}

EvalReport evaluate(const Predictor& predict, std::span<const data::UtteranceRecord> corpus) {
  if (corpus.empty()) throw InsufficientDataError("evaluate: corpus is empty");
  std::vector<UttScore> scores(corpus.size());
  const auto n = static_cast<std::ptrdiff_t>(corpus.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& u = corpus[static_cast<std::size_t>(i)];
    const auto pred = predict(u);
    require_same_length(pred, u.f0, "evaluate");
    scores[static_cast<std::size_t>(i)] = score_utterance(u, pred);
  }
  std::sort(scores.begin(), scores.end(),
            [](const UttScore& a, const UttScore& b) { return a.utt_id < b.utt_id; });

  EvalReport r;
  double sq_hz = 0.0, sq_log = 0.0;
  std::size_t mutual = 0;
  for (const auto& s : scores) {
    if (s.skipped) {
      ++r.n_skipped;
      continue;
    }
    ++r.n_utterances;
    r.rho_f0 += s.rho;
    r.voicing.accuracy += s.voicing.accuracy;
    r.voicing.precision += s.voicing.precision;
    r.voicing.recall += s.voicing.recall;
    r.voicing.f1 += s.voicing.f1;
    r.voicing.tp += s.voicing.tp;
    r.voicing.tn += s.voicing.tn;
    r.voicing.fp += s.voicing.fp;
    r.voicing.fn += s.voicing.fn;
    sq_hz += s.sq_hz;
    sq_log += s.sq_log;
    mutual += s.n_mutual;
  }
  if (r.n_utterances == 0)
    throw InsufficientDataError("evaluate: every utterance lacks two mutually voiced frames");
  const auto k = static_cast<double>(r.n_utterances);
  r.rho_f0 /= k;
  r.voicing.accuracy /= k;
  r.voicing.precision /= k;
  r.voicing.recall /= k;
  r.voicing.f1 /= k;
  r.rmse_hz = std::sqrt(sq_hz / static_cast<double>(mutual));
  r.rmse_log = std::sqrt(sq_log / static_cast<double>(mutual));
  return r;
}

EvalReport evaluate(const training::TrainedBundle& bundle,
                    std::span<const data::UtteranceRecord> corpus) {
  return evaluate(
      [&bundle](const data::UtteranceRecord& u) {
        return training::predict_utterance(bundle, u.bn, u.xvec, u.f0.hop, u.f0.window);
      },
      corpus);
}

json to_json(const SwapResult& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j = {{"source_utt_id", r.source_utt_id},
            {"donor_speaker_id", r.donor_speaker_id},
            {"voiced_mean_shift_hz", opt(r.voiced_mean_shift_hz)},
            {"rho_vs_source", opt(r.rho_vs_source)},
            {"voicing_agreement", r.voicing_agreement},
            {"frames", r.predicted.size()}};
  if (!r.issue.empty()) j["issue"] = r.issue;
  return j;
}

SwapResult swap_experiment(const training::TrainedBundle& bundle,
                           const data::UtteranceRecord& source, std::span<const float> donor_xvec,
                           const std::string& donor_speaker_id) {
  SwapResult r;
  r.source_utt_id = source.utt_id;
  r.donor_speaker_id = donor_speaker_id;
  r.predicted = training::predict_utterance(bundle, source.bn, donor_xvec, source.f0.hop,
                                            source.f0.window);
  const auto& truth = source.f0.values;
  const auto& pred = r.predicted.values;
  std::size_t agree = 0, n_pred = 0, n_true = 0;
  double sum_pred = 0.0, sum_true = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    agree += (pred[t] > 0.0) == (truth[t] > 0.0) ? 1 : 0;
    if (pred[t] > 0.0) {
      sum_pred += pred[t];
      ++n_pred;
    }
    if (truth[t] > 0.0) {
      sum_true += truth[t];
      ++n_true;
    }
  }
  r.voicing_agreement = ratio(agree, pred.size());
  if (n_pred > 0 && n_true > 0)
    r.voiced_mean_shift_hz = sum_pred / static_cast<double>(n_pred) -
                             sum_true / static_cast<double>(n_true);
  try {
    r.rho_vs_source = pitch_correlation(r.predicted, source.f0);
  } catch (const InsufficientDataError& e) {
    r.issue = e.what();
  }
  return r;
}

double speaker_mean_f0(std::span<const data::UtteranceRecord> corpus, const std::string& speaker_id) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& u : corpus)
    if (u.speaker_id == speaker_id)
      for (double v : u.f0.values)
        if (v > 0.0) {
          sum += v;
          ++n;
        }
  if (n == 0)
    throw InsufficientDataError("speaker '" + speaker_id + "' has no voiced frames");
  return sum / static_cast<double>(n);
}

void export_trajectories_csv(std::span<const std::pair<std::string, dsp::F0Trajectory>> items,
                             const std::filesystem::path& path) {
  for (const auto& [label, traj] : items)
    if (label.find(',') != std::string::npos || label.find('\n') != std::string::npos)
      throw ConfigError("trajectory label '" + label + "' contains a separator");
  io::atomic_write(path, [&](std::ostream& os) {
    os << "label,frame_index,time_s,f0_hz\n";
    char line[96];
    for (const auto& [label, traj] : items)
      for (std::size_t n = 0; n < traj.size(); ++n) {
        std::snprintf(line, sizeof line, ",%zu,%.6f,", n, static_cast<double>(n) * traj.hop);
        os << label << line << io::format_hz(traj.values[n]) << '\n';
      }
  });
}

std::vector<std::pair<std::string, dsp::F0Trajectory>> read_trajectories_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("label,frame_index,time_s,f0_hz", 0) != 0)
    throw IoError(path.string() + ": missing header label,frame_index,time_s,f0_hz");
  std::vector<std::pair<std::string, dsp::F0Trajectory>> out;
  std::map<std::string, std::size_t> index;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = io::split_csv_line(line);
    const std::string ctx = path.string() + ":" + std::to_string(lineno);
    if (f.size() != 4) throw IoError(ctx + ": expected 4 fields");
    auto [it, inserted] = index.try_emplace(f[0], out.size());
    if (inserted) out.emplace_back(f[0], dsp::F0Trajectory{});
    out[it->second].second.values.push_back(io::parse_double(f[3], ctx));
  }
  return out;
}

}  // namespace f0reg::eval
