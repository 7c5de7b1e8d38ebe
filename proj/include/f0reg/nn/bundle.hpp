#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "f0reg/dsp/f0.hpp"
#include "f0reg/nn/model.hpp"

namespace f0reg::nn {

nlohmann::json to_json(const ModelConfig& cfg);
/// Rejects unknown keys; missing keys keep their defaults.
ModelConfig model_config_from_json(const nlohmann::json& j);

/// Serialized model with its normalization statistics.
///
/// Byte layout (all integers and floats little-endian):
///   [0, 4)      magic "F0M1"
///   [4, 8)      u32 header length H
///   [8, 8+H)    UTF-8 JSON: {"model": ModelConfig, "parameter_count": P,
///               "extra": {...}}
///   then        P f64 values, layer by layer: weights row-major, then bias
///   then        f64 mean_log, f64 std_log
struct ModelBundle {
  MLPModel model;
  dsp::NormStats stats;
  nlohmann::json extra = nlohmann::json::object();
};

std::string encode_bundle(const ModelBundle& bundle);
ModelBundle decode_bundle(const std::vector<char>& bytes, const std::string& source);

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace f0reg::nn
