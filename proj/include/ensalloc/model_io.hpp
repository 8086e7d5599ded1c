#pragma once

#include <memory>
#include <string>

#include "ensalloc/model.hpp"

namespace ensalloc {

/// Rebuilds a model from its to_json() form; dispatches on the "family" tag.
std::unique_ptr<PredictionModel> model_from_json(const nlohmann::ordered_json& j);

void save_model(const PredictionModel& model, const std::string& path);
std::unique_ptr<PredictionModel> load_model(const std::string& path);

}  // namespace ensalloc
