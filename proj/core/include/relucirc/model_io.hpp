#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "relucirc/mlp.hpp"

namespace relucirc {

/// Free-form provenance stored next to the parameters.
struct ModelMetadata {
  std::uint64_t seed = 0;
  std::map<std::string, std::string> training;
};

/// Model file layout (JSON):
///
///   { "format": "relucirc-model", "version": 1,
///     "arch": { "input_dim": 2, "hidden_widths": [6, 6, 6] },
///     "layers": [ { "weights": [[row0...], ...], "bias": [...] }, ... ],
///     "bottleneck": { "weights": [[...]], "bias": [...] },     (optional)
///     "seed": 7, "training": { "steps": "20000", ... } }
///
/// Every real number is a C99 hexadecimal float string ("0x1.8p+0") so a
/// save/load round trip reproduces each double bit for bit.
void save_model(const Model& model, const ModelMetadata& meta, const std::filesystem::path& path);
void save_model(const MlpParams& params, const ModelMetadata& meta, const std::filesystem::path& path);

/// Throws FormatError on malformed files and InputError if the file is missing.
Model load_model(const std::filesystem::path& path, ModelMetadata* meta = nullptr);

std::string model_to_json(const Model& model, const ModelMetadata& meta);
Model model_from_json(const std::string& text, ModelMetadata* meta = nullptr);

}  // namespace relucirc
