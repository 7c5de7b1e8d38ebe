#include "f0reg/nn/bundle.hpp"

#include "f0reg/io_util.hpp"

namespace f0reg::nn {

using nlohmann::json;

namespace {

constexpr std::string_view kBundleMagic = "F0M1";

}  // namespace

json to_json(const ModelConfig& cfg) {
  return {{"input_dim", cfg.input_dim},
          {"hidden", cfg.hidden},
          {"activation", to_string(cfg.activation)},
          {"dropout_p", cfg.dropout_p}};
}

ModelConfig model_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  ModelConfig cfg;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "input_dim")
        cfg.input_dim = value.get<std::size_t>();
      else if (key == "hidden")
        cfg.hidden = value.get<std::vector<std::size_t>>();
      else if (key == "activation")
        cfg.activation = activation_from_string(value.get<std::string>());
      else if (key == "dropout_p")
        cfg.dropout_p = value.get<double>();
      else
        throw ConfigError("unknown model config key '" + key + "'");
    } catch (const json::exception& e) {
      throw ConfigError("model config key '" + key + "': " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

std::string encode_bundle(const ModelBundle& bundle) {
  const auto& model = bundle.model;
  json header = {{"model", to_json(model.config())},
                 {"parameter_count", model.parameter_count()},
                 {"extra", bundle.extra}};
  const std::string text = header.dump();
  std::string buf;
  buf.reserve(8 + text.size() + 8 * (model.parameter_count() + 2));
  buf += kBundleMagic;
  io::put<std::uint32_t>(buf, static_cast<std::uint32_t>(text.size()));
  buf += text;
  for (const auto& layer : model.layers()) {
    for (double w : layer.weight_data()) io::put<double>(buf, w);
    for (double b : layer.bias()) io::put<double>(buf, b);
  }
  io::put<double>(buf, bundle.stats.mean_log);
  io::put<double>(buf, bundle.stats.std_log);
  return buf;
}

ModelBundle decode_bundle(const std::vector<char>& bytes, const std::string& source) {
  io::ByteReader rd(bytes, source);
  if (bytes.size() < 4 || rd.bytes(4, "magic") != kBundleMagic)
    throw IoError(source + ": bad magic (expected F0M1 at byte offset 0)");
  const auto len = rd.get<std::uint32_t>("header length");
  const auto text = rd.bytes(len, "header");
  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(source + ": malformed header at byte offset 8: " + e.what());
  }
  ModelBundle bundle;
  std::size_t declared = 0;
  try {
    bundle.model = MLPModel(model_config_from_json(header.at("model")));
    declared = header.at("parameter_count").get<std::size_t>();
    bundle.extra = header.value("extra", json::object());
  } catch (const json::exception& e) {
    throw IoError(source + ": malformed header: " + e.what());
  } catch (const ConfigError& e) {
    throw IoError(source + ": invalid model config: " + e.what());
  }
  if (declared != bundle.model.parameter_count())
    throw IoError(source + ": header declares " + std::to_string(declared) +
                  " parameters, architecture has " +
                  std::to_string(bundle.model.parameter_count()));
  rd.need(8 * (declared + 2), "parameter payload");
  for (auto& layer : bundle.model.layers()) {
    for (double& w : layer.weight_data()) w = rd.get<double>("weight");
    for (double& b : layer.bias()) b = rd.get<double>("bias");
  }
  bundle.stats.mean_log = rd.get<double>("mean_log");
  bundle.stats.std_log = rd.get<double>("std_log");
  if (rd.remaining() != 0)
    throw IoError(source + ": " + std::to_string(rd.remaining()) +
                  " trailing bytes at byte offset " + std::to_string(rd.offset()));
  return bundle;
}

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
  const std::string buf = encode_bundle(bundle);
  io::atomic_write(path, [&](std::ostream& os) { os.write(buf.data(), buf.size()); });
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  return decode_bundle(io::read_file(path), path.string());
}

}  // namespace f0reg::nn
