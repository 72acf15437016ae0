#pragma once

#include <filesystem>
#include <stdexcept>

#include <json.hpp>

#include "ocf/forest.hpp"

namespace ocf {

inline constexpr int kModelFormatVersion = 1;

/// Raised for unreadable or incompatible model files.
class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json params_to_json(const ForestParams& params);
ForestParams params_from_json(const nlohmann::json& j);

/// Self-describing model document: format tag, version, estimator kind,
/// parameters, column metadata, honest split, estimation outcomes and every
/// tree's node arrays. Round trips losslessly.
nlohmann::json model_to_json(const ForestEnsemble& model);
ForestEnsemble model_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const ForestEnsemble& model);
ForestEnsemble load_model(const std::filesystem::path& path);

}  // namespace ocf
