#include "f0reg/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "f0reg/io_util.hpp"
#include "f0reg/nn/loss.hpp"
#include "f0reg/nn/optimizer.hpp"
#include "f0reg/random.hpp"
#include "f0reg/training/plateau.hpp"

namespace f0reg::training {

using nlohmann::json;

namespace {

enum Stream : std::uint64_t { kInit = 1, kShuffle = 2, kDropout = 3, kSplit = 4 };

constexpr std::size_t kEvalChunk = 4096;

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be > 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be >= 0");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ConfigError("dropout_p must lie in [0, 1)");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (early_stop_patience < 1 || lr_patience < 1) throw ConfigError("patience values must be >= 1");
  if (!(lr_factor > 0.0 && lr_factor < 1.0)) throw ConfigError("lr_factor must lie in (0, 1)");
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw ConfigError("val_fraction must lie in (0, 1)");
  nn::AdamConfig{lr, beta1, beta2, adam_epsilon}.validate();
}

json to_json(const TrainConfig& c) {
  return {{"lr", c.lr},
          {"alpha", c.alpha},
          {"dropout_p", c.dropout_p},
          {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},
          {"early_stop_patience", c.early_stop_patience},
          {"lr_patience", c.lr_patience},
          {"lr_factor", c.lr_factor},
          {"val_fraction", c.val_fraction},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"adam_epsilon", c.adam_epsilon},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  TrainConfig c;
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "lr") c.lr = v.get<double>();
      else if (key == "alpha") c.alpha = v.get<double>();
      else if (key == "dropout_p") c.dropout_p = v.get<double>();
      else if (key == "batch_size") c.batch_size = v.get<std::size_t>();
      else if (key == "max_epochs") c.max_epochs = v.get<std::size_t>();
      else if (key == "early_stop_patience") c.early_stop_patience = v.get<int>();
      else if (key == "lr_patience") c.lr_patience = v.get<int>();
      else if (key == "lr_factor") c.lr_factor = v.get<double>();
      else if (key == "val_fraction") c.val_fraction = v.get<double>();
      else if (key == "beta1") c.beta1 = v.get<double>();
      else if (key == "beta2") c.beta2 = v.get<double>();
      else if (key == "adam_epsilon") c.adam_epsilon = v.get<double>();
      else throw ConfigError("unknown train config key '" + key + "'");
    } catch (const json::exception& e) {
      throw ConfigError("train config key '" + key + "': " + e.what());
    }
  }
  c.validate();
  return c;
}

double evaluate_loss(const nn::MLPModel& model, const data::FrameMatrix& frames, double alpha) {
  const std::size_t n = frames.rows();
  Matrix preds(n, nn::kOutputDim);
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < n; start += kEvalChunk) {
    const std::size_t end = std::min(n, start + kEvalChunk);
    Matrix chunk(end - start, frames.inputs.cols());
    std::copy(frames.inputs.data() + start * frames.inputs.cols(),
              frames.inputs.data() + end * frames.inputs.cols(), chunk.data());
    const Matrix p = nn::predict(model, chunk);
    std::copy(p.flat().begin(), p.flat().end(), preds.data() + start * nn::kOutputDim);
  }
  return nn::loss_forward(preds, frames.targets_f0, frames.voiced, alpha).total;
}

TrainResult train(const data::FrameMatrix& train_frames, const data::FrameMatrix& val_frames,
                  const nn::ModelConfig& model_cfg, const TrainConfig& cfg,
                  const dsp::NormStats& stats, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_frames.rows() == 0 || val_frames.rows() == 0)
    throw InsufficientDataError("train: training and validation sets must be nonempty");
  nn::ModelConfig mc = model_cfg;
  mc.dropout_p = cfg.dropout_p;
  require_shape(train_frames.inputs.cols() == mc.input_dim &&
                    val_frames.inputs.cols() == mc.input_dim,
                "train: frame width " + std::to_string(train_frames.inputs.cols()) +
                    " does not match model input_dim " + std::to_string(mc.input_dim));

  nn::MLPModel model = nn::init_model(mc, derive_seed(cfg.seed, {kInit}));
  auto opt = nn::make_optimizer_state(model, {cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_epsilon});
  auto lr_monitor = PlateauState::lr_scheduler(cfg.lr_patience);
  auto stop_monitor = PlateauState::early_stopping(cfg.early_stop_patience);

  TrainResult result;
  nn::MLPModel best = model;
  double best_val = std::numeric_limits<double>::infinity();

  const std::size_t n = train_frames.rows();
  const std::size_t width = train_frames.inputs.cols();
  std::vector<std::size_t> order(n);
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, {kShuffle, epoch}));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    EpochReport rep;
    rep.epoch = epoch;
    rep.lr = opt.config.lr;
    double weighted_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      const std::size_t b = end - start;
      Matrix batch(b, width);
      std::vector<double> targets(b);
      std::vector<char> voiced(b);
      for (std::size_t i = 0; i < b; ++i) {
        const std::size_t r = order[start + i];
        const auto src = train_frames.inputs.row(r);
        std::copy(src.begin(), src.end(), batch.row(i).begin());
        targets[i] = train_frames.targets_f0[r];
        voiced[i] = train_frames.voiced[r];
      }
      auto fr = nn::forward(model, batch, nn::Mode::train,
                            derive_seed(cfg.seed, {kDropout, epoch, batch_index}));
      const auto loss = nn::loss_forward(fr.preds, targets, voiced, cfg.alpha);
      if (!std::isfinite(loss.total))
        throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch_index));
      const Matrix grad = nn::loss_backward(fr.preds, targets, voiced, cfg.alpha);
      const auto grads = nn::backward(model, fr.trace, grad);
      nn::optimizer_step(model, grads, opt);
      weighted_loss += loss.total * static_cast<double>(b);
    }
    rep.train_loss = weighted_loss / static_cast<double>(n);
    rep.val_loss = evaluate_loss(model, val_frames, cfg.alpha);
    if (!std::isfinite(rep.val_loss))
      throw NumericalError("non-finite validation loss at epoch " + std::to_string(epoch));

    if (rep.val_loss < best_val) {
      best_val = rep.val_loss;
      best = model;
      result.best_epoch = epoch;
    }
    // LR reduction is evaluated before early stopping on the same epoch.
    const auto lr_action = plateau_step(lr_monitor, rep.val_loss);
    if (lr_action == PlateauAction::reduce_lr) opt.config.lr *= cfg.lr_factor;
    const auto stop_action = plateau_step(stop_monitor, rep.val_loss);
    rep.stale_epochs_lr = lr_monitor.stale_count;
    rep.stale_epochs_early_stop = stop_monitor.stale_count;
    result.history.push_back(rep);
    if (on_epoch) on_epoch(rep);
    if (stop_action == PlateauAction::stop) break;
  }

  result.bundle.model = std::move(best);
  result.bundle.stats = stats;
  result.bundle.extra = {{"train", to_json(cfg)}, {"best_epoch", result.best_epoch}};
  return result;
}

dsp::F0Trajectory predict_utterance(const TrainedBundle& bundle, const FloatMatrix& bn,
                                    std::span<const float> xvec, double hop, double window) {
  require_shape(bn.cols() + xvec.size() == bundle.model.input_dim(),
                "predict_utterance: features (" + std::to_string(bn.cols()) + " + " +
                    std::to_string(xvec.size()) + ") do not match model input_dim " +
                    std::to_string(bundle.model.input_dim()));
  dsp::F0Trajectory out;
  out.hop = hop;
  out.window = window;
  if (bn.rows() == 0) return out;
  const Matrix preds = nn::predict(bundle.model, data::utterance_inputs(bn, xvec));
  out.values.resize(bn.rows());
  for (std::size_t t = 0; t < bn.rows(); ++t) {
    // Gate on the sign of the logit. Equivalent to sigmoid(logit) > 0.5, except
    // that the sigmoid rounds to exactly 0.5 for 0 < logit below ~1e-16.
    const double logit = preds(t, nn::kVoicingHead);
    out.values[t] = logit > 0.0 ? dsp::denormalize(preds(t, nn::kF0Head), bundle.stats) : 0.0;
  }
  return out;
}

TrainResult train_on_corpus(std::span<const data::UtteranceRecord> corpus,
                            const nn::ModelConfig& model_cfg, const TrainConfig& cfg,
                            const EpochCallback& on_epoch) {
  if (corpus.empty()) throw InsufficientDataError("train: corpus is empty");
  data::validate_corpus(corpus);
  const auto trajs = data::trajectories(corpus);
  const auto stats = dsp::compute_norm_stats(trajs);
  const auto frames = data::assemble_frames(corpus, stats);
  auto [train_part, val_part] =
      data::split_frames(frames, cfg.val_fraction, derive_seed(cfg.seed, {kSplit}));
  nn::ModelConfig mc = model_cfg;
  mc.input_dim = frames.inputs.cols();
  return train(train_part, val_part, mc, cfg, stats, on_epoch);
}

std::string history_csv(std::span<const EpochReport> history) {
  std::string out = "epoch,train_loss,val_loss,lr\n";
  char line[128];
  for (const auto& r : history) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", r.epoch, r.train_loss,
                  r.val_loss, r.lr);
    out += line;
  }
  return out;
}

void write_history_csv(const std::filesystem::path& path,
                       std::span<const EpochReport> history) {
  const std::string text = history_csv(history);
  io::atomic_write(path, [&](std::ostream& os) { os << text; });
}

}  // namespace f0reg::training
