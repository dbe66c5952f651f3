#pragma once

// Validation tooling: an independent feasibility oracle, infeasible-set and
// baseline generators, PCA diversity and classification reports.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hemsflex/hems.hpp"
#include "hemsflex/scenario.hpp"
#include "hemsflex/svdd.hpp"

namespace hemsflex {

/// Steps the battery and tank on its own (no hems_model helpers) and reports
/// whether every constraint and the PV-accommodation rule hold in one scenario.
[[nodiscard]] bool oracle_compliant(const FlexTrajectory& traj, std::span<const double> net_load,
                                    const HemsConfig& cfg);

/// Number of scenarios in which `traj` is compliant.
[[nodiscard]] int oracle_check(const FlexTrajectory& traj, const ScenarioSet& scenarios, const HemsConfig& cfg);

struct InfeasibleSample {
    std::vector<FlexTrajectory> trajectories;
    long draws = 0;

    [[nodiscard]] double acceptance_rate() const
    {
        return draws > 0 ? static_cast<double>(trajectories.size()) / static_cast<double>(draws) : 0.0;
    }
};

/// Rejection sampling over the power band: keeps uniform draws that are not
/// robust under the oracle. Throws NumericalError if `max_draws` is exhausted
/// before a single trajectory is found.
[[nodiscard]] InfeasibleSample generate_infeasible_set(std::size_t count, const HemsConfig& cfg,
                                                       const ScenarioSet& scenarios, double tau_scen,
                                                       std::uint64_t seed, long max_draws = 10'000'000);

/// Greedy step-by-step construction under one net-load scenario: each step
/// draws uniformly from the currently feasible single-step range. Dead ends
/// restart the trajectory. Throws NumericalError after `max_restarts`.
[[nodiscard]] std::vector<FlexTrajectory> semi_random_baseline(std::size_t count, const HemsConfig& cfg,
                                                               std::span<const double> net_load,
                                                               std::uint64_t seed, long max_restarts = 1'000'000);

struct DiversityReport {
    int n_components_50 = 1;
    int n_components_80 = 1;
    std::vector<double> explained;  // per component, descending
    bool degenerate = false;
};

/// PCA on the covariance of the combined (p_bat + p_ewh) trajectories.
[[nodiscard]] DiversityReport pca_diversity(const std::vector<FlexTrajectory>& set, double low = 0.5,
                                            double high = 0.8);

struct ConfusionRow {
    std::string kernel;
    double gamma = 0.0;
    double nu = 0.0;
    std::size_t feasible_correct = 0;
    std::size_t feasible_incorrect = 0;
    std::size_t infeasible_correct = 0;
    std::size_t infeasible_incorrect = 0;

    [[nodiscard]] double feasible_error_pct() const;
    [[nodiscard]] double infeasible_error_pct() const;
};

[[nodiscard]] ConfusionRow confusion_table(const SvddModel& model, const std::vector<FlexTrajectory>& feasible,
                                           const std::vector<FlexTrajectory>& infeasible);

/// Table layout: kernel,gamma,nu,feasible_correct,...,infeasible_error_pct.
[[nodiscard]] std::string confusion_csv(const std::vector<ConfusionRow>& rows);

}  // namespace hemsflex
