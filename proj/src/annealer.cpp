#include "countermachine/annealer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "countermachine/errors.hpp"
#include "countermachine/format.hpp"

namespace cfm {

void AnnealConfig::validate() const {
    if (!(initial_temperature > 0.0)) throw InvalidArgument("initial_temperature must be > 0");
    if (!(cooling_factor > 0.0 && cooling_factor < 1.0)) throw InvalidArgument("cooling_factor must be in (0, 1)");
    if (steps_per_temperature < 1) throw InvalidArgument("steps_per_temperature must be >= 1");
    if (!(min_temperature > 0.0)) throw InvalidArgument("min_temperature must be > 0");
    if (!(min_temperature < initial_temperature))
        throw InvalidArgument("min_temperature must be below initial_temperature");
    if (!(proposal_scale > 0.0)) throw InvalidArgument("proposal_scale must be > 0");
    if (!(target_error >= 0.0)) throw InvalidArgument("target_error must be >= 0");
    if (max_evaluations < 0) throw InvalidArgument("max_evaluations must be >= 0");
    if (restarts < 1) throw InvalidArgument("restarts must be >= 1");
}

Eigen::VectorXd propose(const Eigen::VectorXd& x, const FreeMask& free_mask, double scale, double temperature,
                        Rng& rng) {
    if (free_mask.size() != static_cast<std::size_t>(x.size()))
        throw DimensionMismatch(static_cast<std::size_t>(x.size()), free_mask.size());
    std::normal_distribution<double> step(0.0, scale * temperature);
    Eigen::VectorXd out = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!free_mask[static_cast<std::size_t>(i)]) continue;
        out(i) = std::clamp(x(i) + step(rng), 0.0, 1.0);
    }
    return out;
}

bool accept(double delta_error, double temperature, Rng& rng) {
    if (delta_error <= 0.0) return true;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng) < std::exp(-delta_error / temperature);
}

Rng restart_rng(std::uint64_t seed, int restart) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(restart)};
    return Rng(seq);
}

namespace {

double checked(const Objective& objective, const Eigen::VectorXd& x) {
    const double v = objective(x);
    if (!std::isfinite(v)) throw NonFiniteObjective("objective returned " + std::to_string(v));
    return v;
}

}  // namespace

AnnealResult minimize(const Objective& objective, const Eigen::VectorXd& x0, const FreeMask& free_mask,
                      const AnnealConfig& config) {
    config.validate();
    if (free_mask.size() != static_cast<std::size_t>(x0.size()))
        throw DimensionMismatch(static_cast<std::size_t>(x0.size()), free_mask.size());
    if ((x0.array() < 0.0).any() || (x0.array() > 1.0).any() || !x0.allFinite())
        throw InvalidArgument("initial point lies outside [0, 1]^n");

    AnnealResult result{x0, checked(objective, x0), {}};
    const bool any_free = std::any_of(free_mask.begin(), free_mask.end(), [](bool b) { return b; });
    if (!any_free || result.error_best <= config.target_error) return result;
    const double initial_error = result.error_best;

    const long base_budget = config.max_evaluations / config.restarts;
    const long extra = config.max_evaluations % config.restarts;

    for (int k = 0; k < config.restarts; ++k) {
        if (result.error_best <= config.target_error) break;
        Rng rng = restart_rng(config.seed, k);
        const long budget = base_budget + (k < extra ? 1 : 0);

        Eigen::VectorXd current = x0;
        double current_error = initial_error;
        Eigen::VectorXd best = current;
        double best_error = current_error;
        double temperature = config.initial_temperature;

        for (long used = 0; used < budget && temperature >= config.min_temperature &&
                            best_error > config.target_error;) {
            Eigen::VectorXd candidate = propose(current, free_mask, config.proposal_scale, temperature, rng);
            const double candidate_error = checked(objective, candidate);
            ++used;
            ++result.trace.evaluations;
            if (accept(candidate_error - current_error, temperature, rng)) {
                current = std::move(candidate);
                current_error = candidate_error;
                if (current_error < best_error) {
                    best_error = current_error;
                    best = current;
                }
                result.trace.records.push_back({k, result.trace.evaluations, temperature, current_error, best_error});
            }
            if (used % config.steps_per_temperature == 0) temperature *= config.cooling_factor;
        }

        result.trace.best_per_restart.push_back(best_error);
        if (best_error < result.error_best) {
            result.error_best = best_error;
            result.x_best = best;
        }
    }
    return result;
}

void write_trace_csv(std::ostream& out, const AnnealTrace& trace) {
    out << "eval_index,temperature,error\n";
    for (const auto& r : trace.records)
        out << r.evaluation << ',' << format_double(r.temperature) << ',' << format_double(r.error) << '\n';
}

}  // namespace cfm
