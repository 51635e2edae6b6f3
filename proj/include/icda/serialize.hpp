#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "icda/metrics.hpp"
#include "icda/nn.hpp"
#include "icda/trainer.hpp"

namespace icda {

using json = nlohmann::ordered_json;

json model_to_json(const Model& model);
// Throws ShapeError/DomainError on inconsistent content.
Model model_from_json(const json& j);

json report_to_json(const EvalReport& report);
json train_config_to_json(const TrainConfig& cfg);
json manifest_to_json(const RunManifest& manifest, const TrainConfig& cfg);
json history_to_json(const RunHistory& history);

// increment,domain,classes_seen,accuracy,tpr,tnr,ppv,f1,acc_increment_1,total_loss,...
std::string curves_csv(const RunHistory& history);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace icda
