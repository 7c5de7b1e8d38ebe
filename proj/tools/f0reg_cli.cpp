// f0reg: command-line entry point.
//
// Exit codes: 0 success, 1 invalid arguments/configuration/data, 2 I/O
// failure, 3 numerical failure (non-finite values, gradient check failure).

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "f0reg/data/corpus.hpp"
#include "f0reg/data/synthetic.hpp"
#include "f0reg/dsp/io.hpp"
#include "f0reg/dsp/pitch.hpp"
#include "f0reg/error.hpp"
#include "f0reg/eval/metrics.hpp"
#include "f0reg/io_util.hpp"
#include "f0reg/nn/bundle.hpp"
#include "f0reg/nn/gradcheck.hpp"
#include "f0reg/random.hpp"
#include "f0reg/training/trainer.hpp"
#include "f0reg/tuner/objective.hpp"
#include "f0reg/tuner/study.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace f0reg;

namespace {

constexpr double kGradCheckTolerance = 1e-4;

json read_json_file(const fs::path& path) {
  const auto bytes = io::read_file(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  io::atomic_write(path, [&](std::ostream& os) { os << text; });
}

data::Corpus load_any_corpus(const fs::path& path) {
  if (path.extension() == ".csv") return data::load_corpus_csv(path);
  return data::load_corpus(path);
}

std::size_t voiced_frames(const data::Corpus& corpus) {
  std::size_t n = 0;
  for (const auto& u : corpus) n += u.f0.voiced_count();
  return n;
}

std::size_t speaker_count(const data::Corpus& corpus) {
  std::set<std::string> s;
  for (const auto& u : corpus) s.insert(u.speaker_id);
  return s.size();
}

json corpus_summary(const data::Corpus& corpus) {
  std::size_t frames = 0;
  for (const auto& u : corpus) frames += u.frames();
  return {{"speakers", speaker_count(corpus)},
          {"utterances", corpus.size()},
          {"frames", frames},
          {"voiced_frames", voiced_frames(corpus)}};
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

nn::ModelConfig model_config_or_default(const std::string& path) {
  return path.empty() ? nn::ModelConfig{} : nn::model_config_from_json(read_json_file(path));
}

training::TrainConfig train_config_or_default(const std::string& path, std::uint64_t seed) {
  auto cfg = path.empty() ? training::TrainConfig{}
                          : training::train_config_from_json(read_json_file(path));
  cfg.seed = seed;
  return cfg;
}

// gen-synth ---------------------------------------------------------------

struct GenSynthArgs {
  std::string spec, out, heldout_out;
  std::uint64_t seed = 0;
  std::size_t heldout_per_speaker = 4;
};

int cmd_gen_synth(const GenSynthArgs& a) {
  auto spec = a.spec.empty() ? data::SyntheticSpec{}
                             : data::synthetic_spec_from_json(read_json_file(a.spec));
  spec.seed = a.seed;
  const auto corpus = data::gen_synthetic(spec);
  json summary;
  if (a.heldout_out.empty()) {
    data::save_corpus(corpus, a.out);
    summary = corpus_summary(corpus);
  } else {
    if (a.heldout_per_speaker >= spec.utterances_per_speaker)
      throw ConfigError("--heldout-per-speaker must be below utterances_per_speaker");
    const auto [train, heldout] = data::split_utterances(corpus, a.heldout_per_speaker);
    data::save_corpus(train, a.out);
    data::save_corpus(heldout, a.heldout_out);
    summary = corpus_summary(train);
    summary["heldout"] = corpus_summary(heldout);
  }
  print_json(summary);
  return 0;
}

// train -------------------------------------------------------------------

struct TrainArgs {
  std::string corpus, config, model_config, out, history;
  std::uint64_t seed = 0;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
  const auto corpus = load_any_corpus(a.corpus);
  const auto mc = model_config_or_default(a.model_config);
  const auto cfg = train_config_or_default(a.config, a.seed);
  const auto result = training::train_on_corpus(
      corpus, mc, cfg, [&](const training::EpochReport& r) {
        if (!a.quiet)
          std::fprintf(stderr, "epoch %zu train_loss %.6g val_loss %.6g lr %.3g\n", r.epoch,
                       r.train_loss, r.val_loss, r.lr);
      });
  nn::save_bundle(result.bundle, a.out);
  training::write_history_csv(a.history, result.history);
  const auto& best = result.history.at(result.best_epoch - 1);
  print_json({{"epochs", result.history.size()},
              {"best_epoch", result.best_epoch},
              {"best_val_loss", best.val_loss},
              {"final_lr", result.history.back().lr},
              {"parameters", result.bundle.model.parameter_count()},
              {"bundle", a.out},
              {"history", a.history}});
  return 0;
}

// tune --------------------------------------------------------------------

struct TuneArgs {
  std::string corpus, config, model_config, out, best;
  std::uint64_t seed = 0;
  std::size_t trials = 50;
  std::size_t max_epochs = 30;
};

int cmd_tune(const TuneArgs& a) {
  const auto corpus = load_any_corpus(a.corpus);
  const auto mc = model_config_or_default(a.model_config);
  const auto base = train_config_or_default(a.config, a.seed);
  const auto objective = tuner::training_objective(corpus, mc, base, a.max_epochs);
  tuner::StudyOptions opts;
  opts.n_trials = a.trials;
  opts.seed = a.seed;
  const auto study = tuner::run_study(objective, tuner::SearchSpace{}, opts);
  const fs::path best_path = a.best.empty() ? fs::path(a.out).replace_extension(".best.json")
                                            : fs::path(a.best);
  tuner::write_study(study, a.out, best_path);
  std::size_t failed = 0;
  for (const auto& t : study.trials) failed += t.status == tuner::TrialStatus::failed ? 1 : 0;
  print_json({{"trials", study.trials.size()},
              {"failed", failed},
              {"best", tuner::to_json(study.best)},
              {"study", a.out},
              {"best_json", best_path.string()}});
  return 0;
}

// eval --------------------------------------------------------------------

struct EvalArgs {
  std::string bundle, corpus, report;
};

int cmd_eval(const EvalArgs& a) {
  const auto bundle = nn::load_bundle(a.bundle);
  const auto corpus = load_any_corpus(a.corpus);
  const auto report = eval::evaluate(bundle, corpus);
  const auto j = eval::to_json(report);
  if (!a.report.empty()) write_text(a.report, j.dump(2) + "\n");
  print_json(j);
  return 0;
}

// swap --------------------------------------------------------------------

struct SwapArgs {
  std::string bundle, corpus, source, donor, out, json_out;
};

const data::UtteranceRecord& first_of_speaker(const data::Corpus& corpus,
                                              const std::string& speaker) {
  for (const auto& u : corpus)
    if (u.speaker_id == speaker) return u;
  std::set<std::string> ids;
  for (const auto& u : corpus) ids.insert(u.speaker_id);
  std::string list;
  for (const auto& id : ids) list += (list.empty() ? "" : ", ") + id;
  throw ConfigError("unknown donor speaker '" + speaker + "'; valid speakers: " + list);
}

int cmd_swap(const SwapArgs& a) {
  const auto bundle = nn::load_bundle(a.bundle);
  const auto corpus = load_any_corpus(a.corpus);
  const auto& source = data::find_utterance(corpus, a.source);
  const auto& donor = first_of_speaker(corpus, a.donor);
  const auto swapped = eval::swap_experiment(bundle, source, donor.xvec, a.donor);
  const auto self = eval::swap_experiment(bundle, source, source.xvec, source.speaker_id);

  const std::vector<std::pair<std::string, dsp::F0Trajectory>> items = {
      {"ground_truth", source.f0}, {"own_embedding", self.predicted}, {"swapped", swapped.predicted}};
  eval::export_trajectories_csv(items, a.out);

  json j = eval::to_json(swapped);
  j["self"] = eval::to_json(self);
  if (source.speaker_id != a.donor) {
    try {
      j["register_gap_hz"] =
          eval::speaker_mean_f0(corpus, a.donor) - eval::speaker_mean_f0(corpus, source.speaker_id);
    } catch (const InsufficientDataError& e) {
      j["register_gap_hz"] = nullptr;
    }
  }
  if (!a.json_out.empty()) write_text(a.json_out, j.dump(2) + "\n");
  print_json(j);
  return 0;
}

// extract-f0 --------------------------------------------------------------

struct ExtractArgs {
  std::string wav, out;
  std::optional<double> rate;
  dsp::TrackerConfig tracker;
};

int cmd_extract_f0(const ExtractArgs& a) {
  a.tracker.validate();
  const auto audio = dsp::read_wav(a.wav, a.rate);
  const auto traj = dsp::extract_f0(audio, a.tracker);
  dsp::write_trajectory_csv(a.out, traj);
  std::vector<double> voiced;
  for (double v : traj.values)
    if (v > 0.0) voiced.push_back(v);
  json j = {{"frames", traj.size()}, {"voiced_frames", voiced.size()}, {"out", a.out}};
  if (!voiced.empty()) {
    std::sort(voiced.begin(), voiced.end());
    const std::size_t m = voiced.size() / 2;
    j["median_voiced_hz"] =
        voiced.size() % 2 == 1 ? voiced[m] : 0.5 * (voiced[m - 1] + voiced[m]);
  }
  print_json(j);
  return 0;
}

// gen-tone ----------------------------------------------------------------

struct ToneArgs {
  std::string out;
  double freq = 220.0, seconds = 1.0, rate = 16000.0, amplitude = 0.5;
  std::string encoding = "pcm16";
};

int cmd_gen_tone(const ToneArgs& a) {
  if (!(a.freq >= 0.0) || !(a.seconds > 0.0) || !(a.rate > 0.0))
    throw ConfigError("gen-tone: frequency must be >= 0, duration and rate > 0");
  const auto audio = dsp::make_tone(a.freq, a.seconds, a.rate, a.amplitude);
  dsp::write_wav(a.out, audio,
                 a.encoding == "float32" ? dsp::WavEncoding::float32 : dsp::WavEncoding::pcm16);
  print_json({{"samples", audio.samples.size()}, {"sample_rate", a.rate}, {"out", a.out}});
  return 0;
}

// gradcheck ---------------------------------------------------------------

struct GradCheckArgs {
  std::vector<std::size_t> dims = {6, 4, 4, 4};
  std::size_t batch = 8;
  std::string activation = "relu";
  double alpha = 0.00022;
  std::uint64_t seed = 0;
};

int cmd_gradcheck(const GradCheckArgs& a) {
  if (a.dims.size() < 2) throw ConfigError("--dims needs an input width and at least one hidden width");
  if (a.batch < 1) throw ConfigError("--batch must be >= 1");
  nn::ModelConfig mc;
  mc.input_dim = a.dims.front();
  mc.hidden.assign(a.dims.begin() + 1, a.dims.end());
  mc.activation = nn::activation_from_string(a.activation);
  const auto model = nn::init_model(mc, derive_seed(a.seed, {1}));

  std::mt19937_64 rng(derive_seed(a.seed, {2}));
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  Matrix batch(a.batch, mc.input_dim);
  for (auto& v : batch.flat()) v = g(rng);
  std::vector<double> targets(a.batch);
  std::vector<char> voiced(a.batch);
  for (std::size_t i = 0; i < a.batch; ++i) {
    voiced[i] = coin(rng) ? 1 : 0;
    targets[i] = voiced[i] ? g(rng) : 0.0;
  }
  const auto rep = nn::grad_check(model, batch, targets, voiced, a.alpha);
  const bool ok = rep.max_rel_error < kGradCheckTolerance;
  print_json({{"max_rel_error", rep.max_rel_error},
              {"tolerance", kGradCheckTolerance},
              {"parameters_checked", rep.parameters_checked},
              {"parameters_skipped", rep.parameters_skipped},
              {"pass", ok}});
  return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"F0 trajectory regression from linguistic features and speaker embeddings"};
  app.require_subcommand(1);
  std::function<int()> run;

  GenSynthArgs gs;
  auto* c_gs = app.add_subcommand("gen-synth", "Generate a synthetic corpus");
  c_gs->add_option("--spec", gs.spec, "SyntheticSpec JSON (defaults if omitted)");
  c_gs->add_option("--out", gs.out, "Output corpus container")->required();
  c_gs->add_option("--seed", gs.seed, "Random seed")->required();
  c_gs->add_option("--heldout-out", gs.heldout_out,
                   "Also split off held-out utterances into this corpus; --out then gets the rest");
  c_gs->add_option("--heldout-per-speaker", gs.heldout_per_speaker,
                   "Held-out utterances per speaker (last ones of each speaker)")
      ->capture_default_str();
  c_gs->callback([&] { run = [&] { return cmd_gen_synth(gs); }; });

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Train a model bundle");
  c_tr->add_option("--corpus", tr.corpus, "Corpus container (.f0c) or CSV manifest (.csv)")->required();
  c_tr->add_option("--config", tr.config, "TrainConfig JSON (defaults if omitted)");
  c_tr->add_option("--model-config", tr.model_config, "ModelConfig JSON (defaults if omitted)");
  c_tr->add_option("--out", tr.out, "Output model bundle")->required();
  c_tr->add_option("--history", tr.history, "Output history CSV")->required();
  c_tr->add_option("--seed", tr.seed, "Random seed")->required();
  c_tr->add_flag("--quiet", tr.quiet, "Do not log epochs to stderr");
  c_tr->callback([&] { run = [&] { return cmd_train(tr); }; });

  TuneArgs tu;
  auto* c_tu = app.add_subcommand("tune", "Random-search hyperparameter study");
  c_tu->add_option("--corpus", tu.corpus, "Corpus container (.f0c) or CSV manifest (.csv)")->required();
  c_tu->add_option("--trials", tu.trials, "Number of trials")->capture_default_str();
  c_tu->add_option("--max-epochs", tu.max_epochs, "Epoch budget per trial")->capture_default_str();
  c_tu->add_option("--config", tu.config, "Base TrainConfig JSON");
  c_tu->add_option("--model-config", tu.model_config, "ModelConfig JSON");
  c_tu->add_option("--out", tu.out, "Output study CSV")->required();
  c_tu->add_option("--best", tu.best, "Output best-trial JSON (default: <out>.best.json)");
  c_tu->add_option("--seed", tu.seed, "Random seed")->required();
  c_tu->callback([&] { run = [&] { return cmd_tune(tu); }; });

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "Evaluate a bundle on a corpus");
  c_ev->add_option("--bundle", ev.bundle, "Model bundle")->required();
  c_ev->add_option("--corpus", ev.corpus, "Corpus container (.f0c) or CSV manifest (.csv)")->required();
  c_ev->add_option("--report", ev.report, "Output report JSON");
  c_ev->callback([&] { run = [&] { return cmd_eval(ev); }; });

  SwapArgs sw;
  auto* c_sw = app.add_subcommand("swap", "Predict F0 with another speaker's embedding");
  c_sw->add_option("--bundle", sw.bundle, "Model bundle")->required();
  c_sw->add_option("--corpus", sw.corpus, "Corpus holding source and donor")->required();
  c_sw->add_option("--source", sw.source, "Source utterance id")->required();
  c_sw->add_option("--donor", sw.donor, "Donor speaker id")->required();
  c_sw->add_option("--out", sw.out, "Output trajectories CSV")->required();
  c_sw->add_option("--json", sw.json_out, "Output summary JSON");
  c_sw->callback([&] { run = [&] { return cmd_swap(sw); }; });

  ExtractArgs ex;
  double rate_opt = 0.0;
  auto* c_ex = app.add_subcommand("extract-f0", "Track F0 in a mono WAV file");
  c_ex->add_option("--wav", ex.wav, "Input WAV (mono PCM16 or float32)")->required();
  c_ex->add_option("--out", ex.out, "Output trajectory CSV")->required();
  auto* rate_flag = c_ex->add_option("--rate", rate_opt, "Required sample rate");
  c_ex->add_option("--f-min", ex.tracker.f_min, "Lowest F0 (Hz)")->capture_default_str();
  c_ex->add_option("--f-max", ex.tracker.f_max, "Highest F0 (Hz)")->capture_default_str();
  c_ex->add_option("--threshold", ex.tracker.threshold, "Dip threshold")->capture_default_str();
  c_ex->add_option("--hop", ex.tracker.hop, "Hop (s)")->capture_default_str();
  c_ex->add_option("--window", ex.tracker.window, "Window (s)")->capture_default_str();
  c_ex->callback([&] {
    if (rate_flag->count() > 0) ex.rate = rate_opt;
    run = [&] { return cmd_extract_f0(ex); };
  });

  ToneArgs tn;
  auto* c_tn = app.add_subcommand("gen-tone", "Write a sine tone WAV");
  c_tn->add_option("--out", tn.out, "Output WAV")->required();
  c_tn->add_option("--freq", tn.freq, "Frequency (Hz); 0 gives silence")->capture_default_str();
  c_tn->add_option("--seconds", tn.seconds, "Duration (s)")->capture_default_str();
  c_tn->add_option("--rate", tn.rate, "Sample rate (Hz)")->capture_default_str();
  c_tn->add_option("--amplitude", tn.amplitude, "Peak amplitude")->capture_default_str();
  c_tn->add_option("--encoding", tn.encoding, "pcm16 or float32")
      ->check(CLI::IsMember({"pcm16", "float32"}))
      ->capture_default_str();
  c_tn->callback([&] { run = [&] { return cmd_gen_tone(tn); }; });

  GradCheckArgs gc;
  auto* c_gc = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  c_gc->add_option("--dims", gc.dims, "Input width followed by hidden widths")
      ->delimiter(',')
      ->capture_default_str();
  c_gc->add_option("--batch", gc.batch, "Batch size")->capture_default_str();
  c_gc->add_option("--activation", gc.activation, "relu, tanh or identity")->capture_default_str();
  c_gc->add_option("--alpha", gc.alpha, "Loss trade-off")->capture_default_str();
  c_gc->add_option("--seed", gc.seed, "Random seed")->required();
  c_gc->callback([&] { run = [&] { return cmd_gradcheck(gc); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    return run();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
