#include "train/checkpoint.hpp"

#include <fstream>
#include <string>
#include <vector>

#include "core/errors.hpp"
#include "json.hpp"

namespace attnfc {

using nlohmann::json;

void save_checkpoint(const Forecaster& model, const CheckpointMeta& meta,
                     const std::filesystem::path& file) {
  json doc;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["model"] = {
      {"mode", to_string(model.config.mode)},
      {"lookback", model.config.lookback},
      {"encoder1_size", model.config.encoder1_size},
      {"encoder2_size", model.config.encoder2_size},
      {"dropout_rate", model.config.dropout_rate},
      {"time2vec_l", model.config.time2vec_l},
      {"feature_count", model.config.feature_count},
  };
  doc["metadata"] = {
      {"epoch", meta.epoch},
      {"validation_loss", meta.validation_loss},
      {"seed", meta.seed},
  };
  json params = json::object();
  model.visit_params([&](const std::string& name, const Tensor& t) {
    json entry;
    entry["shape"] = std::vector<std::size_t>(t.shape().begin(), t.shape().end());
    entry["data"] = std::vector<double>(t.data().begin(), t.data().end());
    params[name] = std::move(entry);
  });
  doc["params"] = std::move(params);

  std::ofstream out(file);
  if (!out) throw IoError("cannot write checkpoint " + file.string());
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("failed writing checkpoint " + file.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open checkpoint " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("checkpoint " + file.string() + ": " + e.what());
  }

  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw IoError("checkpoint " + file.string() + ": unsupported format version " +
                    std::to_string(version) + " (expected " +
                    std::to_string(kCheckpointFormatVersion) + ")");
    }

    const json& mc = doc.at("model");
    ModelConfig config;
    config.mode = model_mode_from_string(mc.at("mode").get<std::string>());
    config.lookback = mc.at("lookback").get<std::size_t>();
    config.encoder1_size = mc.at("encoder1_size").get<std::size_t>();
    config.encoder2_size = mc.at("encoder2_size").get<std::size_t>();
    config.dropout_rate = mc.at("dropout_rate").get<double>();
    config.time2vec_l = mc.at("time2vec_l").get<std::size_t>();
    config.feature_count = mc.at("feature_count").get<std::size_t>();
    config.validate();

    LoadedCheckpoint loaded{Forecaster::init(config, 0), {}};
    const json& meta = doc.at("metadata");
    loaded.meta.epoch = meta.at("epoch").get<std::size_t>();
    loaded.meta.validation_loss = meta.at("validation_loss").get<double>();
    loaded.meta.seed = meta.at("seed").get<std::uint64_t>();

    const json& params = doc.at("params");
    std::size_t filled = 0;
    loaded.model.visit_params([&](const std::string& name, Tensor& t) {
      if (!params.contains(name)) {
        throw IoError("checkpoint " + file.string() + ": missing tensor '" + name + "'");
      }
      const json& entry = params.at(name);
      auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      if (!std::equal(shape.begin(), shape.end(), t.shape().begin(), t.shape().end()) ||
          shape.size() != t.shape().size()) {
        throw IoError("checkpoint " + file.string() + ": tensor '" + name +
                      "' has mismatched shape");
      }
      auto data = entry.at("data").get<std::vector<double>>();
      if (data.size() != t.size()) {
        throw IoError("checkpoint " + file.string() + ": tensor '" + name + "' has " +
                      std::to_string(data.size()) + " values, expected " +
                      std::to_string(t.size()));
      }
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = data[i];
      ++filled;
    });
    if (params.size() != filled) {
      for (const auto& [key, value] : params.items()) {
        (void)value;
        bool known = false;
        loaded.model.visit_params([&](const std::string& name, const Tensor&) {
          if (name == key) known = true;
        });
        if (!known) {
          throw IoError("checkpoint " + file.string() + ": unexpected tensor '" + key + "'");
        }
      }
    }
    return loaded;
  } catch (const json::exception& e) {
    throw IoError("checkpoint " + file.string() + ": malformed document: " + e.what());
  }
}

}  // namespace attnfc
