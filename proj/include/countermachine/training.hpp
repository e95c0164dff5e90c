#pragma once

// Hybrid training for TskModel: least squares for the consequents, batch
// gradient descent on the Gaussian premises.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "countermachine/fuzzy.hpp"

namespace cfm {

/// Training pairs, one row of `x` per sample.
struct Samples {
    Eigen::MatrixXd x;
    Eigen::VectorXd t;

    Eigen::Index size() const { return x.rows(); }
};

struct TrainConfig {
    int mfs_per_input = 2;
    int epochs = 30;
    double premise_learning_rate = 0.05;
    double ridge_lambda = 0.1;
    std::uint64_t seed = 0;
    std::size_t rule_cap = 256;

    void validate() const;
};

struct TrainReport {
    std::vector<double> loss;
    double train_acc = 0.0;
    double test_acc = 0.0;
};

nlohmann::json to_json(const TrainReport& report);

inline constexpr double kMinWidth = 1e-3;
/// Fitted outputs on training inputs beyond this magnitude mean the fit diverged.
inline constexpr double kDivergenceBound = 10.0;

/// Evenly spaced Gaussians per input and the full Cartesian rule grid, zero consequents.
TskModel init_grid(std::vector<std::string> feature_names, const TrainConfig& config,
                   const LabelEncoding& encoding = {});

double mean_squared_error(const TskModel& model, const Samples& data);

/// Fraction of samples whose predicted class matches the class of their target.
double accuracy(const TskModel& model, const Samples& data);

/// Rows of the consequent least-squares system: normalized firing strengths times [1, x].
Eigen::MatrixXd consequent_design(const TskModel& model, const Samples& data);

TskModel lse_consequents(const TskModel& model, const Samples& data, double ridge_lambda);

/// Premise parameters flattened as all centers (input-major) followed by all widths.
Eigen::VectorXd premise_parameters(const TskModel& model);
TskModel with_premise_parameters(const TskModel& model, const Eigen::VectorXd& params);

/// Gradient of mean squared error with respect to premise_parameters(model).
Eigen::VectorXd premise_gradient(const TskModel& model, const Samples& data);

/// One batch gradient step; widths are clamped below at kMinWidth.
TskModel premise_gradient_step(const TskModel& model, const Samples& data, double learning_rate);

struct FitResult {
    TskModel model;
    TrainReport report;
};

/// Alternates LSE and premise steps for config.epochs rounds and keeps the
/// epoch with the lowest training loss.
FitResult fit(const Samples& train, const Samples& test, std::vector<std::string> feature_names,
              const TrainConfig& config, const LabelEncoding& encoding = {});

}  // namespace cfm
