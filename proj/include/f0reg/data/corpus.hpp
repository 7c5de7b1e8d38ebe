#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "f0reg/dsp/f0.hpp"
#include "f0reg/matrix.hpp"

namespace f0reg::data {

/// One utterance: frame-aligned bottleneck features, an utterance-level
/// speaker embedding, and the ground-truth F0 track.
struct UtteranceRecord {
  std::string utt_id;
  std::string speaker_id;
  FloatMatrix bn;           // T x D_bn
  std::vector<float> xvec;  // D_xv
  dsp::F0Trajectory f0;     // length T

  std::size_t frames() const { return bn.rows(); }
  bool operator==(const UtteranceRecord&) const = default;
};

using Corpus = std::vector<UtteranceRecord>;

/// Checks frame alignment and that all records share D_bn and D_xv.
void validate_corpus(std::span<const UtteranceRecord> corpus);

std::vector<dsp::F0Trajectory> trajectories(std::span<const UtteranceRecord> corpus);

/// Splits per speaker: the last `heldout_per_speaker` utterances of each
/// speaker (in corpus order) go to the second set.
std::pair<Corpus, Corpus> split_utterances(const Corpus& corpus,
                                           std::size_t heldout_per_speaker);

const UtteranceRecord& find_utterance(std::span<const UtteranceRecord> corpus,
                                      const std::string& utt_id);

/// Binary container: "F0C1", u32 manifest length, JSON manifest, payloads of
/// little-endian f32 (bn row-major, xvec, f0 in Hz) per utterance.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

/// Text import for small hand-written corpora. The manifest has header
/// `utt_id,speaker_id,frames_file,xvec_file`; each frames file has one row per
/// frame `f0_hz,bn_0,...,bn_{D-1}`; each xvec file holds one comma-separated
/// row. Relative paths are resolved against the manifest's directory.
Corpus load_corpus_csv(const std::filesystem::path& manifest);

}  // namespace f0reg::data
