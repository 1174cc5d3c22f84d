#include "relucirc/model_io.hpp"

#include "json_util.hpp"

namespace relucirc {

using detail::json;

namespace {

json to_json(const Model& model, const ModelMetadata& meta) {
  const MlpParams& p = model.mlp;
  json j;
  j["format"] = "relucirc-model";
  j["version"] = 1;
  j["arch"] = {{"input_dim", p.arch.input_dim}, {"hidden_widths", p.arch.hidden_widths}};
  json layers = json::array();
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    layers.push_back({{"weights", detail::matrix_to_json(p.weights[l])},
                      {"bias", detail::vector_to_json(p.biases[l])}});
  }
  j["layers"] = std::move(layers);
  if (model.bottleneck) {
    j["bottleneck"] = {{"weights", detail::matrix_to_json(model.bottleneck->weight)},
                       {"bias", detail::vector_to_json(model.bottleneck->bias)}};
  }
  j["seed"] = meta.seed;
  j["training"] = meta.training;
  return j;
}

Model from_json(const json& j, ModelMetadata* meta) {
  try {
    if (j.value("format", std::string{}) != "relucirc-model") {
      throw FormatError("not a relucirc model file");
    }
    Model model;
    MlpParams& p = model.mlp;
    p.arch.input_dim = j.at("arch").at("input_dim").get<std::size_t>();
    p.arch.hidden_widths = j.at("arch").at("hidden_widths").get<std::vector<std::size_t>>();
    try {
      p.arch.validate();
    } catch (const InputError& e) {
      throw FormatError(e.what());
    }
    const json& layers = j.at("layers");
    if (!layers.is_array() || layers.size() != p.arch.depth() + 1) {
      throw FormatError("layer count does not match architecture");
    }
    for (std::size_t l = 0; l <= p.arch.depth(); ++l) {
      const auto rows = static_cast<Eigen::Index>(p.arch.width(l + 1));
      const auto cols = static_cast<Eigen::Index>(p.arch.width(l));
      p.weights.push_back(detail::matrix_from_json(layers[l].at("weights"), rows, cols));
      p.biases.push_back(detail::vector_from_json(layers[l].at("bias"), rows));
    }
    if (j.contains("bottleneck")) {
      const json& b = j["bottleneck"];
      const json& w = b.at("weights");
      const auto rows = static_cast<Eigen::Index>(p.arch.input_dim);
      if (!w.is_array() || w.empty() || !w[0].is_array()) throw FormatError("malformed bottleneck");
      const auto cols = static_cast<Eigen::Index>(w[0].size());
      model.bottleneck = AffineMap{detail::matrix_from_json(w, rows, cols),
                                   detail::vector_from_json(b.at("bias"), rows)};
    }
    if (meta != nullptr) {
      meta->seed = j.value("seed", std::uint64_t{0});
      meta->training.clear();
      if (j.contains("training")) {
        meta->training = j["training"].get<std::map<std::string, std::string>>();
      }
    }
    try {
      p.validate();
    } catch (const InputError& e) {
      throw FormatError(e.what());
    }
    return model;
  } catch (const json::exception& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
}

}  // namespace

std::string model_to_json(const Model& model, const ModelMetadata& meta) {
  return to_json(model, meta).dump(1);
}

Model model_from_json(const std::string& text, ModelMetadata* meta) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
  return from_json(j, meta);
}

void save_model(const Model& model, const ModelMetadata& meta, const std::filesystem::path& path) {
  detail::write_json_file(path, to_json(model, meta));
}

void save_model(const MlpParams& params, const ModelMetadata& meta, const std::filesystem::path& path) {
  save_model(Model{std::nullopt, params}, meta, path);
}

Model load_model(const std::filesystem::path& path, ModelMetadata* meta) {
  return from_json(detail::read_json_file(path), meta);
}

}  // namespace relucirc
