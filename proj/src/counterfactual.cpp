#include "countermachine/counterfactual.hpp"

#include <algorithm>
#include <cmath>

namespace cfm {

std::string_view to_string(Direction d) {
    switch (d) {
        case Direction::Additive: return "additive";
        case Direction::Subtractive: return "subtractive";
        case Direction::Unchanged: return "unchanged";
    }
    return "unchanged";
}

void validate_query(const TskModel& model, const CounterfactualQuery& query) {
    validate_features(model, query.factual);
    if (query.free_mask.size() != static_cast<std::size_t>(model.n_inputs()))
        throw DimensionMismatch(static_cast<std::size_t>(model.n_inputs()), query.free_mask.size());
    if (!std::isfinite(query.desired_consequent) || query.desired_consequent < 0.0 || query.desired_consequent > 1.0)
        throw InvalidArgument("desired consequent must lie in [0, 1]");
    if (!(query.success_margin > 0.0) || !(query.success_margin < 0.5))
        throw InvalidArgument("success_margin must lie in (0, 0.5)");
    query.anneal.validate();
}

std::vector<VariableDelta> delta_report(const FeatureVector& factual, const FeatureVector& antecedent,
                                        const std::vector<std::string>& feature_names) {
    if (antecedent.size() != factual.size())
        throw DimensionMismatch(static_cast<std::size_t>(factual.size()), static_cast<std::size_t>(antecedent.size()));
    if (feature_names.size() != static_cast<std::size_t>(factual.size()))
        throw DimensionMismatch(static_cast<std::size_t>(factual.size()), feature_names.size());

    std::vector<VariableDelta> out;
    out.reserve(feature_names.size());
    for (Eigen::Index i = 0; i < factual.size(); ++i) {
        VariableDelta d{feature_names[static_cast<std::size_t>(i)], factual(i), antecedent(i), Direction::Unchanged};
        if (antecedent(i) > factual(i) + kDeltaTolerance)
            d.direction = Direction::Additive;
        else if (antecedent(i) < factual(i) - kDeltaTolerance)
            d.direction = Direction::Subtractive;
        out.push_back(std::move(d));
    }
    return out;
}

CounterfactualResult find_counterfactual(const TskModel& model, const CounterfactualQuery& query) {
    validate_query(model, query);

    const ConsequentObjective objective(model, query.desired_consequent);
    AnnealResult search = minimize(objective, query.factual, query.free_mask, query.anneal);

    CounterfactualResult result;
    result.no_free_variables = std::none_of(query.free_mask.begin(), query.free_mask.end(), [](bool b) { return b; });
    result.antecedent = std::move(search.x_best);
    // Locked coordinates are copied from the factual so they match bit for bit.
    for (Eigen::Index i = 0; i < result.antecedent.size(); ++i)
        if (!query.free_mask[static_cast<std::size_t>(i)]) result.antecedent(i) = query.factual(i);

    const auto eval = evaluate(model, result.antecedent);
    result.achieved_y = eval.y;
    result.degenerate_activation = eval.degenerate;
    const double residual = eval.y - query.desired_consequent;
    result.error = residual * residual;
    result.achieved_class = model.label_encoding().classify(eval.y);
    result.success = std::abs(residual) < 0.5 - query.success_margin;
    result.deltas = delta_report(query.factual, result.antecedent, model.feature_names());
    result.trace = std::move(search.trace);
    return result;
}

FreeMask realistic_free_mask(const std::vector<std::string>& feature_names) {
    FreeMask mask(feature_names.size(), true);
    for (std::size_t i = 0; i < feature_names.size(); ++i) {
        const auto& n = feature_names[i];
        if (n == "distance" || n == "contiguity" || n == "major_power") mask[i] = false;
    }
    return mask;
}

FreeMask free_mask_from_names(const std::vector<std::string>& feature_names, const std::vector<std::string>& free) {
    FreeMask mask(feature_names.size(), false);
    for (const auto& name : free) {
        const auto it = std::find(feature_names.begin(), feature_names.end(), name);
        if (it == feature_names.end()) throw InvalidArgument("unknown feature '" + name + "'");
        mask[static_cast<std::size_t>(it - feature_names.begin())] = true;
    }
    return mask;
}

}  // namespace cfm
