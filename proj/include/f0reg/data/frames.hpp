#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "f0reg/data/corpus.hpp"
#include "f0reg/dsp/f0.hpp"
#include "f0reg/matrix.hpp"

namespace f0reg::data {

struct FrameProvenance {
  std::uint32_t utterance = 0;  // index into FrameMatrix::utt_ids
  std::uint32_t frame = 0;
  bool operator==(const FrameProvenance&) const = default;
};

/// All frames of a corpus stacked into one tall matrix. Each row is
/// [bn[t] | xvec]; targets are normalized log-F0 (0.0 on unvoiced rows).
struct FrameMatrix {
  Matrix inputs;
  std::vector<double> targets_f0;
  std::vector<char> voiced;
  std::vector<FrameProvenance> provenance;
  std::vector<std::string> utt_ids;

  std::size_t rows() const { return inputs.rows(); }
  std::size_t voiced_count() const;
};

FrameMatrix assemble_frames(std::span<const UtteranceRecord> corpus,
                            const dsp::NormStats& stats);

/// Copies the listed rows, in the given order.
FrameMatrix gather_rows(const FrameMatrix& frames, std::span<const std::size_t> rows);

/// Uniform row-level random split; |val| = round(val_fraction * N).
std::pair<FrameMatrix, FrameMatrix> split_frames(const FrameMatrix& frames,
                                                 double val_fraction,
                                                 std::uint64_t seed);

/// Inputs for one utterance with an arbitrary embedding: rows [bn[t] | xvec].
Matrix utterance_inputs(const FloatMatrix& bn, std::span<const float> xvec);

}  // namespace f0reg::data
