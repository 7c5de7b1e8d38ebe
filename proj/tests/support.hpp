#pragma once

// Shared helpers for the test executables: scratch directories, hand-rolled
// random generators and a scalar reference network used as an oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "f0reg/data/corpus.hpp"
#include "f0reg/matrix.hpp"
#include "f0reg/nn/model.hpp"

namespace testsupport {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("f0reg-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline double rel_diff(double a, double b) {
  const double d = std::max(std::abs(a), std::abs(b));
  return d == 0.0 ? 0.0 : std::abs(a - b) / d;
}

/// Random generator wrapper for property tests.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng); }
  std::size_t size(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

  f0reg::Matrix matrix(std::size_t r, std::size_t c, double scale = 1.0) {
    f0reg::Matrix m(r, c);
    for (auto& v : m.flat()) v = scale * normal();
    return m;
  }

  f0reg::nn::ModelConfig model_config(std::size_t max_width, std::size_t max_in) {
    f0reg::nn::ModelConfig mc;
    mc.input_dim = size(1, max_in);
    mc.hidden.resize(size(1, 3));
    for (auto& h : mc.hidden) h = size(1, max_width);
    const auto a = size(0, 2);
    mc.activation = a == 0 ? f0reg::nn::Activation::relu
                           : a == 1 ? f0reg::nn::Activation::tanh
                                    : f0reg::nn::Activation::identity;
    return mc;
  }

  /// Voicing vector with at least one voiced entry when `force_voiced`.
  std::vector<char> voicing(std::size_t n, bool force_voiced = true) {
    std::vector<char> v(n);
    for (auto& x : v) x = coin() ? 1 : 0;
    if (force_voiced && n > 0) v[size(0, n - 1)] = 1;
    return v;
  }
};

// ---------------------------------------------------------------------------
// Scalar reference network: plain loops over std::vector, no shared kernels.

inline double ref_act(f0reg::nn::Activation a, double z) {
  switch (a) {
    case f0reg::nn::Activation::relu: return z > 0.0 ? z : 0.0;
    case f0reg::nn::Activation::tanh: return std::tanh(z);
    default: return z;
  }
}

/// Eval-mode forward pass of one row.
inline std::vector<double> ref_forward_row(const f0reg::nn::MLPModel& m, std::span<const double> x) {
  std::vector<double> a(x.begin(), x.end());
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    const auto& p = m.layer(l);
    std::vector<double> z(p.out_dim());
    for (std::size_t o = 0; o < p.out_dim(); ++o) {
      double s = p.bias()[o];
      for (std::size_t i = 0; i < p.in_dim(); ++i) s += p.weight(o, i) * a[i];
      z[o] = l + 1 < m.num_layers() ? ref_act(m.config().activation, s) : s;
    }
    a = std::move(z);
  }
  return a;
}

/// Joint loss computed independently of the library.
inline double ref_loss(const f0reg::nn::MLPModel& m, const f0reg::Matrix& batch,
                       const std::vector<double>& targets, const std::vector<char>& voiced,
                       double alpha) {
  double sq = 0.0, bce = 0.0;
  std::size_t nv = 0;
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    const auto out = ref_forward_row(m, batch.row(r));
    if (voiced[r]) {
      sq += (out[0] - targets[r]) * (out[0] - targets[r]);
      ++nv;
    }
    const double x = out[1];
    const double y = voiced[r] ? 1.0 : 0.0;
    // Written as -[y log s + (1-y) log(1-s)] with log s = -log1p(e^-x).
    const double log_s = x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
    const double log_1ms = x >= 0 ? -x - std::log1p(std::exp(-x)) : -std::log1p(std::exp(x));
    bce += -(y * log_s + (1.0 - y) * log_1ms);
  }
  const double mse = nv == 0 ? 0.0 : sq / static_cast<double>(nv);
  return mse + alpha * bce / static_cast<double>(batch.rows());
}

/// Small corpus builder for unit tests.
inline f0reg::data::UtteranceRecord make_utterance(const std::string& utt, const std::string& spk,
                                                   std::vector<double> f0, std::size_t d_bn,
                                                   std::size_t d_xv, Gen& g) {
  f0reg::data::UtteranceRecord u;
  u.utt_id = utt;
  u.speaker_id = spk;
  u.bn = f0reg::FloatMatrix(f0.size(), d_bn);
  for (auto& v : u.bn.flat()) v = static_cast<float>(g.normal());
  u.xvec.resize(d_xv);
  for (auto& v : u.xvec) v = static_cast<float>(g.normal());
  u.f0.values = std::move(f0);
  return u;
}

}  // namespace testsupport
