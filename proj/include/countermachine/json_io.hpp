#pragma once

// JSON mirrors of the query/result types.

#include <json.hpp>

#include "countermachine/annealer.hpp"
#include "countermachine/counterfactual.hpp"

namespace cfm {

nlohmann::json to_json(const AnnealConfig& config);
/// Starts from `base` and overrides whatever fields `doc` carries. Throws InvalidArgument on bad types.
AnnealConfig anneal_config_from_json(const nlohmann::json& doc, AnnealConfig base = {});

nlohmann::json to_json(const AnnealTrace& trace, bool include_records);

nlohmann::json to_json(const CounterfactualQuery& query, const std::vector<std::string>& feature_names);

/// Result document; the per-step trace records are included only on request.
nlohmann::json to_json(const CounterfactualResult& result, const std::vector<std::string>& feature_names,
                       bool include_trace_records = false);

nlohmann::json to_json(const FeatureVector& x);
FeatureVector feature_vector_from_json(const nlohmann::json& doc, const char* field);

}  // namespace cfm
