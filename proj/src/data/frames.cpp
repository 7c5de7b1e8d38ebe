#include "f0reg/data/frames.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace f0reg::data {

std::size_t FrameMatrix::voiced_count() const {
  return static_cast<std::size_t>(std::count(voiced.begin(), voiced.end(), 1));
}

Matrix utterance_inputs(const FloatMatrix& bn, std::span<const float> xvec) {
  const std::size_t d_bn = bn.cols();
  Matrix out(bn.rows(), d_bn + xvec.size());
  for (std::size_t t = 0; t < bn.rows(); ++t) {
    auto row = out.row(t);
    const auto src = bn.row(t);
    std::copy(src.begin(), src.end(), row.begin());
    std::copy(xvec.begin(), xvec.end(), row.begin() + static_cast<std::ptrdiff_t>(d_bn));
  }
  return out;
}

FrameMatrix assemble_frames(std::span<const UtteranceRecord> corpus,
                            const dsp::NormStats& stats) {
  validate_corpus(corpus);
  std::size_t n = 0;
  for (const auto& u : corpus) n += u.frames();
  const std::size_t width =
      corpus.empty() ? 0 : corpus.front().bn.cols() + corpus.front().xvec.size();

  FrameMatrix fm;
  fm.inputs = Matrix(n, width);
  fm.targets_f0.assign(n, 0.0);
  fm.voiced.assign(n, 0);
  fm.provenance.resize(n);
  std::size_t row = 0;
  for (std::size_t ui = 0; ui < corpus.size(); ++ui) {
    const auto& u = corpus[ui];
    fm.utt_ids.push_back(u.utt_id);
    const std::size_t d_bn = u.bn.cols();
    for (std::size_t t = 0; t < u.frames(); ++t, ++row) {
      auto dst = fm.inputs.row(row);
      const auto src = u.bn.row(t);
      std::copy(src.begin(), src.end(), dst.begin());
      std::copy(u.xvec.begin(), u.xvec.end(), dst.begin() + static_cast<std::ptrdiff_t>(d_bn));
      if (u.f0.values[t] > 0.0) {
        fm.voiced[row] = 1;
        fm.targets_f0[row] = dsp::normalize(u.f0.values[t], stats);
      }
      fm.provenance[row] = {static_cast<std::uint32_t>(ui), static_cast<std::uint32_t>(t)};
    }
  }
  return fm;
}

FrameMatrix gather_rows(const FrameMatrix& frames, std::span<const std::size_t> rows) {
  FrameMatrix out;
  out.utt_ids = frames.utt_ids;
  out.inputs = Matrix(rows.size(), frames.inputs.cols());
  out.targets_f0.resize(rows.size());
  out.voiced.resize(rows.size());
  out.provenance.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    require_shape(r < frames.rows(), "gather_rows: row index out of range");
    const auto src = frames.inputs.row(r);
    std::copy(src.begin(), src.end(), out.inputs.row(i).begin());
    out.targets_f0[i] = frames.targets_f0[r];
    out.voiced[i] = frames.voiced[r];
    out.provenance[i] = frames.provenance[r];
  }
  return out;
}

std::pair<FrameMatrix, FrameMatrix> split_frames(const FrameMatrix& frames,
                                                 double val_fraction,
                                                 std::uint64_t seed) {
  const std::size_t n = frames.rows();
  if (n < 10)
    throw InsufficientDataError("split_frames: need at least 10 frames, got " +
                                std::to_string(n));
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw ConfigError("split_frames: val_fraction must lie in (0, 1)");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  // Keep corpus order inside each part.
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());
  return {gather_rows(frames, train), gather_rows(frames, val)};
}

}  // namespace f0reg::data
