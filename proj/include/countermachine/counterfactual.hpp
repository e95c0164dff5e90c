#pragma once

// Counterfactual search: find the antecedent whose model consequent is
// closest to a desired value, starting from the factual and moving only the
// free variables.

#include <string>
#include <string_view>
#include <vector>

#include "countermachine/annealer.hpp"
#include "countermachine/fuzzy.hpp"

namespace cfm {

struct CounterfactualQuery {
    FeatureVector factual;
    double desired_consequent = 0.0;
    FreeMask free_mask;
    AnnealConfig anneal;
    double success_margin = 0.1;
};

/// Throws DimensionMismatch or InvalidArgument when the query does not fit the model.
void validate_query(const TskModel& model, const CounterfactualQuery& query);

enum class Direction { Additive, Subtractive, Unchanged };

std::string_view to_string(Direction d);

struct VariableDelta {
    std::string name;
    double factual = 0.0;
    double counterfactual = 0.0;
    Direction direction = Direction::Unchanged;
};

inline constexpr double kDeltaTolerance = 1e-9;

std::vector<VariableDelta> delta_report(const FeatureVector& factual, const FeatureVector& antecedent,
                                        const std::vector<std::string>& feature_names);

struct CounterfactualResult {
    FeatureVector antecedent;
    double achieved_y = 0.0;
    /// (achieved_y - desired)^2
    double error = 0.0;
    Label achieved_class = Label::Peace;
    bool success = false;
    bool no_free_variables = false;
    bool degenerate_activation = false;
    std::vector<VariableDelta> deltas;
    AnnealTrace trace;
};

/// Squared distance between the model consequent and a desired value.
class ConsequentObjective {
public:
    ConsequentObjective(const TskModel& model, double desired) : model_(&model), desired_(desired) {}

    double operator()(const Eigen::VectorXd& x) const {
        const double r = evaluate(*model_, x).y - desired_;
        return r * r;
    }

private:
    const TskModel* model_;
    double desired_;
};

CounterfactualResult find_counterfactual(const TskModel& model, const CounterfactualQuery& query);

/// Features the `--realistic-locks` preset keeps fixed: distance, contiguity, major power.
FreeMask realistic_free_mask(const std::vector<std::string>& feature_names);

/// Mask with exactly the named features free; unknown names throw InvalidArgument.
FreeMask free_mask_from_names(const std::vector<std::string>& feature_names, const std::vector<std::string>& free);

}  // namespace cfm
