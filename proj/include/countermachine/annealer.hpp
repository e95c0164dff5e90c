#pragma once

// Simulated annealing over the unit box with a per-coordinate lock mask.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace cfm {

using Rng = std::mt19937_64;
/// true = the coordinate may change.
using FreeMask = std::vector<bool>;
using Objective = std::function<double(const Eigen::VectorXd&)>;

struct AnnealConfig {
    double initial_temperature = 1.0;
    double cooling_factor = 0.95;
    int steps_per_temperature = 50;
    double min_temperature = 1e-4;
    /// Proposal standard deviation at T = 1, in normalized feature units.
    double proposal_scale = 2.0;
    double target_error = 1e-4;
    /// Total budget across restarts, split evenly between them.
    long max_evaluations = 200000;
    int restarts = 4;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TraceRecord {
    int restart = 0;
    long evaluation = 0;
    double temperature = 0.0;
    double error = 0.0;
    double best_error = 0.0;
};

struct AnnealTrace {
    /// One record per accepted move.
    std::vector<TraceRecord> records;
    std::vector<double> best_per_restart;
    long evaluations = 0;
};

struct AnnealResult {
    Eigen::VectorXd x_best;
    double error_best = 0.0;
    AnnealTrace trace;
};

/// Gaussian step of standard deviation scale * temperature on free coordinates, clamped to [0, 1].
Eigen::VectorXd propose(const Eigen::VectorXd& x, const FreeMask& free_mask, double scale, double temperature,
                        Rng& rng);

/// Metropolis criterion.
bool accept(double delta_error, double temperature, Rng& rng);

/// Generator for restart `restart` of a run seeded with `seed`.
Rng restart_rng(std::uint64_t seed, int restart);

AnnealResult minimize(const Objective& objective, const Eigen::VectorXd& x0, const FreeMask& free_mask,
                      const AnnealConfig& config);

/// CSV with header `eval_index,temperature,error`.
void write_trace_csv(std::ostream& out, const AnnealTrace& trace);

}  // namespace cfm
