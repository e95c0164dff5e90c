#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "countermachine/fuzzy.hpp"

namespace cfm {

inline constexpr int kModelFormatVersion = 1;

/// Versioned JSON document for a model. Doubles are written with round-trip precision.
nlohmann::json model_to_json(const TskModel& model);

/// Throws MalformedModel on any schema or invariant violation.
TskModel model_from_json(const nlohmann::json& doc);

std::string serialize(const TskModel& model);
TskModel deserialize(std::string_view text);

void save_model(const TskModel& model, const std::filesystem::path& path);
TskModel load_model(const std::filesystem::path& path);

}  // namespace cfm
