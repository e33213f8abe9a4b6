#pragma once

#include "micp/model.hpp"
#include "micp/two_stage.hpp"

#include <json.hpp>

#include <string>

namespace micp {

using Json = nlohmann::json;

Json expr_to_json(const ConvexExpr& e);
ConvexExpr expr_from_json(const Json& j, int dim);

Json model_to_json(const ModelInstance& m);
ModelInstance model_from_json(const Json& j);

Json two_stage_to_json(const TwoStageInstance& inst);
TwoStageInstance two_stage_from_json(const Json& j);

/// Parses a file; throws ModelError with the path on malformed input.
Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace micp
