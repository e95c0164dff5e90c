#include "countermachine/json_io.hpp"

namespace cfm {

using nlohmann::json;

json to_json(const AnnealConfig& c) {
    return {
        {"initial_temperature", c.initial_temperature},
        {"cooling_factor", c.cooling_factor},
        {"steps_per_temperature", c.steps_per_temperature},
        {"min_temperature", c.min_temperature},
        {"proposal_scale", c.proposal_scale},
        {"target_error", c.target_error},
        {"max_evaluations", c.max_evaluations},
        {"restarts", c.restarts},
        {"seed", c.seed},
    };
}

namespace {

template <typename T>
void read_field(const json& doc, const char* key, T& out) {
    if (!doc.contains(key)) return;
    const auto& v = doc.at(key);
    if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw InvalidArgument(std::string("anneal.") + key + " must be a number");
    } else {
        if (!v.is_number_integer()) throw InvalidArgument(std::string("anneal.") + key + " must be an integer");
        if constexpr (std::is_unsigned_v<T>)
            if (v.is_number_integer() && !v.is_number_unsigned())
                throw InvalidArgument(std::string("anneal.") + key + " must be non-negative");
    }
    out = v.get<T>();
}

}  // namespace

AnnealConfig anneal_config_from_json(const json& doc, AnnealConfig c) {
    if (!doc.is_object()) throw InvalidArgument("anneal must be an object");
    for (const auto& [key, _] : doc.items()) {
        static const std::vector<std::string> known = {"initial_temperature", "cooling_factor", "steps_per_temperature",
                                                       "min_temperature",     "proposal_scale", "target_error",
                                                       "max_evaluations",     "restarts",       "seed"};
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw InvalidArgument("unknown anneal field '" + key + "'");
    }
    read_field(doc, "initial_temperature", c.initial_temperature);
    read_field(doc, "cooling_factor", c.cooling_factor);
    read_field(doc, "steps_per_temperature", c.steps_per_temperature);
    read_field(doc, "min_temperature", c.min_temperature);
    read_field(doc, "proposal_scale", c.proposal_scale);
    read_field(doc, "target_error", c.target_error);
    read_field(doc, "max_evaluations", c.max_evaluations);
    read_field(doc, "restarts", c.restarts);
    read_field(doc, "seed", c.seed);
    c.validate();
    return c;
}

json to_json(const AnnealTrace& trace, bool include_records) {
    json out = {{"evaluations", trace.evaluations},
                {"accepted_steps", trace.records.size()},
                {"best_per_restart", trace.best_per_restart}};
    if (include_records) {
        json records = json::array();
        for (const auto& r : trace.records)
            records.push_back({{"restart", r.restart},
                               {"eval_index", r.evaluation},
                               {"temperature", r.temperature},
                               {"error", r.error},
                               {"best_error", r.best_error}});
        out["records"] = std::move(records);
    }
    return out;
}

json to_json(const FeatureVector& x) {
    json out = json::array();
    for (Eigen::Index i = 0; i < x.size(); ++i) out.push_back(x(i));
    return out;
}

FeatureVector feature_vector_from_json(const json& doc, const char* field) {
    if (!doc.is_array()) throw InvalidArgument(std::string("'") + field + "' must be an array of numbers");
    FeatureVector x(static_cast<Eigen::Index>(doc.size()));
    for (std::size_t i = 0; i < doc.size(); ++i) {
        if (!doc[i].is_number()) throw InvalidArgument(std::string("'") + field + "' must be an array of numbers");
        x(static_cast<Eigen::Index>(i)) = doc[i].get<double>();
    }
    return x;
}

json to_json(const CounterfactualQuery& q, const std::vector<std::string>& feature_names) {
    return {
        {"feature_names", feature_names},
        {"factual", to_json(q.factual)},
        {"desired_consequent", q.desired_consequent},
        {"free_mask", q.free_mask},
        {"anneal", to_json(q.anneal)},
        {"success_margin", q.success_margin},
    };
}

json to_json(const CounterfactualResult& r, const std::vector<std::string>& feature_names, bool include_trace_records) {
    json deltas = json::array();
    for (const auto& d : r.deltas)
        deltas.push_back({{"name", d.name},
                          {"factual", d.factual},
                          {"counterfactual", d.counterfactual},
                          {"direction", std::string(to_string(d.direction))}});
    return {
        {"feature_names", feature_names},
        {"antecedent", to_json(r.antecedent)},
        {"achieved_y", r.achieved_y},
        {"error", r.error},
        {"achieved_class", std::string(to_string(r.achieved_class))},
        {"success", r.success},
        {"no_free_variables", r.no_free_variables},
        {"degenerate_activation", r.degenerate_activation},
        {"deltas", std::move(deltas)},
        {"trace", to_json(r.trace, include_trace_records)},
    };
}

}  // namespace cfm
