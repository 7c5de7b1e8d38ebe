#include "f0reg/data/corpus.hpp"

#include <fstream>
#include <map>

#include "json.hpp"

#include "f0reg/io_util.hpp"

namespace f0reg::data {

using nlohmann::json;

namespace {

constexpr std::string_view kCorpusMagic = "F0C1";

std::size_t payload_floats(std::size_t frames, std::size_t d_bn, std::size_t d_xv) {
  return frames * d_bn + d_xv + frames;
}

}  // namespace

void validate_corpus(std::span<const UtteranceRecord> corpus) {
  if (corpus.empty()) return;
  const std::size_t d_bn = corpus.front().bn.cols();
  const std::size_t d_xv = corpus.front().xvec.size();
  for (const auto& u : corpus) {
    if (u.bn.rows() != u.f0.size())
      throw ShapeError("utterance '" + u.utt_id + "': " + std::to_string(u.bn.rows()) +
                       " feature frames but " + std::to_string(u.f0.size()) + " F0 frames");
    if (u.bn.cols() != d_bn || u.xvec.size() != d_xv)
      throw ShapeError("utterance '" + u.utt_id + "': dimensions (" +
                       std::to_string(u.bn.cols()) + ", " + std::to_string(u.xvec.size()) +
                       ") differ from corpus (" + std::to_string(d_bn) + ", " +
                       std::to_string(d_xv) + ")");
  }
}

std::vector<dsp::F0Trajectory> trajectories(std::span<const UtteranceRecord> corpus) {
  std::vector<dsp::F0Trajectory> out;
  out.reserve(corpus.size());
  for (const auto& u : corpus) out.push_back(u.f0);
  return out;
}

std::pair<Corpus, Corpus> split_utterances(const Corpus& corpus,
                                           std::size_t heldout_per_speaker) {
  std::map<std::string, std::size_t> total;
  for (const auto& u : corpus) ++total[u.speaker_id];
  std::map<std::string, std::size_t> seen;
  Corpus keep, held;
  for (const auto& u : corpus) {
    const std::size_t idx = seen[u.speaker_id]++;
    const std::size_t n = total[u.speaker_id];
    if (idx + heldout_per_speaker >= n)
      held.push_back(u);
    else
      keep.push_back(u);
  }
  return {std::move(keep), std::move(held)};
}

const UtteranceRecord& find_utterance(std::span<const UtteranceRecord> corpus,
                                      const std::string& utt_id) {
  for (const auto& u : corpus)
    if (u.utt_id == utt_id) return u;
  std::string known;
  for (std::size_t i = 0; i < corpus.size() && i < 20; ++i)
    known += (i ? ", " : "") + corpus[i].utt_id;
  if (corpus.size() > 20) known += ", ...";
  throw ConfigError("unknown utterance '" + utt_id + "'; valid ids: " + known);
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  validate_corpus(corpus);
  const std::size_t d_bn = corpus.empty() ? 0 : corpus.front().bn.cols();
  const std::size_t d_xv = corpus.empty() ? 0 : corpus.front().xvec.size();
  json manifest;
  manifest["version"] = 1;
  manifest["d_bn"] = d_bn;
  manifest["d_xv"] = d_xv;
  manifest["utterances"] = json::array();
  std::size_t offset = 0;
  for (const auto& u : corpus) {
    const std::size_t bytes = payload_floats(u.frames(), d_bn, d_xv) * sizeof(float);
    manifest["utterances"].push_back({{"utt_id", u.utt_id},
                                      {"speaker_id", u.speaker_id},
                                      {"frames", u.frames()},
                                      {"hop", u.f0.hop},
                                      {"window", u.f0.window},
                                      {"offset", offset},
                                      {"bytes", bytes}});
    offset += bytes;
  }
  const std::string text = manifest.dump();

  std::string buf;
  buf.reserve(8 + text.size() + offset);
  buf += kCorpusMagic;
  io::put<std::uint32_t>(buf, static_cast<std::uint32_t>(text.size()));
  buf += text;
  for (const auto& u : corpus) {
    for (float v : u.bn.flat()) io::put<float>(buf, v);
    for (float v : u.xvec) io::put<float>(buf, v);
    for (double v : u.f0.values) io::put<float>(buf, static_cast<float>(v));
  }
  io::atomic_write(path, [&](std::ostream& os) { os.write(buf.data(), buf.size()); });
}

Corpus load_corpus(const std::filesystem::path& path) {
  const auto data = io::read_file(path);
  const std::string src = path.string();
  io::ByteReader rd(data, src);
  if (data.size() < 4 || rd.bytes(4, "magic") != kCorpusMagic)
    throw IoError(src + ": bad magic (expected F0C1 at byte offset 0)");
  const auto len = rd.get<std::uint32_t>("manifest length");
  const auto text = rd.bytes(len, "manifest");
  json manifest;
  try {
    manifest = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(src + ": malformed manifest at byte offset 8: " + e.what());
  }
  const std::size_t payload_start = rd.offset();
  Corpus corpus;
  try {
    const std::size_t d_bn = manifest.at("d_bn").get<std::size_t>();
    const std::size_t d_xv = manifest.at("d_xv").get<std::size_t>();
    for (const auto& m : manifest.at("utterances")) {
      UtteranceRecord u;
      u.utt_id = m.at("utt_id").get<std::string>();
      u.speaker_id = m.at("speaker_id").get<std::string>();
      const std::size_t frames = m.at("frames").get<std::size_t>();
      const std::size_t offset = m.at("offset").get<std::size_t>();
      const std::size_t expected = payload_floats(frames, d_bn, d_xv) * sizeof(float);
      if (m.contains("bytes") && m.at("bytes").get<std::size_t>() != expected)
        throw IoError(src + ": utterance '" + u.utt_id + "' declares " +
                      std::to_string(m.at("bytes").get<std::size_t>()) +
                      " payload bytes, dimensions imply " + std::to_string(expected));
      const std::size_t start = payload_start + offset;
      const std::size_t available = start <= data.size() ? data.size() - start : 0;
      if (available < expected)
        throw IoError(src + ": utterance '" + u.utt_id + "' payload truncated at byte offset " +
                      std::to_string(start) + ": expected " + std::to_string(expected) +
                      " bytes, found " + std::to_string(available));
      rd.seek(start, "payload");
      u.bn = FloatMatrix(frames, d_bn);
      for (auto& v : u.bn.flat()) v = rd.get<float>("bn");
      u.xvec.resize(d_xv);
      for (auto& v : u.xvec) v = rd.get<float>("xvec");
      u.f0.values.resize(frames);
      for (auto& v : u.f0.values) v = rd.get<float>("f0");
      u.f0.hop = m.value("hop", 0.010);
      u.f0.window = m.value("window", 0.025);
      corpus.push_back(std::move(u));
    }
  } catch (const json::exception& e) {
    throw IoError(src + ": malformed manifest: " + e.what());
  }
  return corpus;
}

namespace {

std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    const std::string ctx = path.string() + ":" + std::to_string(lineno);
    for (const auto& f : io::split_csv_line(line)) row.push_back(io::parse_double(f, ctx));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Corpus load_corpus_csv(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open '" + manifest.string() + "'");
  const auto dir = manifest.parent_path();
  std::string line;
  if (!std::getline(in, line) ||
      line.rfind("utt_id,speaker_id,frames_file,xvec_file", 0) != 0)
    throw IoError(manifest.string() +
                  ": missing header utt_id,speaker_id,frames_file,xvec_file");
  Corpus corpus;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = io::split_csv_line(line);
    if (f.size() != 4) throw IoError(manifest.string() + ": expected 4 fields per row");
    UtteranceRecord u;
    u.utt_id = f[0];
    u.speaker_id = f[1];
    const auto frames = read_numeric_csv(dir / f[2]);
    const auto xv = read_numeric_csv(dir / f[3]);
    if (xv.size() != 1) throw IoError((dir / f[3]).string() + ": expected one row");
    for (double v : xv[0]) u.xvec.push_back(static_cast<float>(v));
    const std::size_t d_bn = frames.empty() ? 0 : frames[0].size() - 1;
    u.bn = FloatMatrix(frames.size(), d_bn);
    for (std::size_t t = 0; t < frames.size(); ++t) {
      if (frames[t].size() != d_bn + 1)
        throw ShapeError("utterance '" + u.utt_id + "': frame " + std::to_string(t) +
                         " has " + std::to_string(frames[t].size()) + " fields");
      u.f0.values.push_back(frames[t][0]);
      for (std::size_t d = 0; d < d_bn; ++d)
        u.bn(t, d) = static_cast<float>(frames[t][d + 1]);
    }
    corpus.push_back(std::move(u));
  }
  validate_corpus(corpus);
  return corpus;
}

}  // namespace f0reg::data
