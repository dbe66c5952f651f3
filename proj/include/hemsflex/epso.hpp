#pragma once

// Two-dimensional evolutionary particle swarm search for trajectories that
// stay feasible in at least a given share of net-load scenarios.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hemsflex/hems.hpp"
#include "hemsflex/random.hpp"
#include "hemsflex/scenario.hpp"

namespace hemsflex {

struct EpsoConfig {
    int pop_size = 30;
    int max_iters = 5000;
    int target_feasible = 1000;
    double comm_factor = 0.15;     // probability that a coordinate sees the global best
    double mutation_max = 0.50;
    double mutation_min = 0.05;
    double tau_learn = 5.0;        // weight mutation scale
    double tau_global = 1.0;       // global-best disturbance scale
    double tau_scen = 0.9;         // share of scenarios a trajectory must satisfy
    double tournament_win = 0.8;
    double seed_zero_fraction = 0.5;  // seeded particles with p_bat zeroed on surplus steps
    double seed_ewh_on_max = 0.3;     // upper bound of a seeded particle's EWH duty cycle
    double dedup_tol = 1e-6;
    std::uint64_t seed = 1;
    unsigned threads = 1;

    void validate() const;
    /// Mutation rate at `iter`, falling linearly from mutation_max to mutation_min.
    [[nodiscard]] double mutation_rate(int iter) const;
};

/// Strategic weights of one dimension: inertia, memory, cooperation.
struct Weights {
    double inertia = 0.0;
    double memory = 0.0;
    double cooperation = 0.0;
    friend bool operator==(const Weights&, const Weights&) = default;
};

inline constexpr double kWeightMin = 0.0;
inline constexpr double kWeightMax = 2.0;

/// Fitness is the count of compliant scenarios. Total penalty breaks ties
/// between equal counts so infeasible particles still feel a gradient.
struct Score {
    int fitness = 0;
    double penalty = 0.0;
    friend bool operator==(const Score&, const Score&) = default;
};

[[nodiscard]] bool better(const Score& a, const Score& b);

struct Particle {
    FlexTrajectory x;
    std::vector<double> v_bat;
    std::vector<double> v_ewh;
    std::array<Weights, 2> weights;  // [battery, ewh]
    FlexTrajectory best;
    Score best_score;
    Score score;
};

/// Trajectories accepted as robustly feasible, with a running mean position.
class FeasibleSet {
public:
    FeasibleSet() = default;
    explicit FeasibleSet(std::size_t horizon);

    /// Adds `traj` unless an existing member is within `dedup_tol` in max-norm.
    bool insert(const FlexTrajectory& traj, int fitness, double dedup_tol);

    [[nodiscard]] std::size_t size() const { return members_.size(); }
    [[nodiscard]] bool empty() const { return members_.empty(); }
    [[nodiscard]] const std::vector<FlexTrajectory>& trajectories() const { return members_; }
    [[nodiscard]] const std::vector<int>& fitness() const { return fitness_; }
    [[nodiscard]] FlexTrajectory mean_position() const;
    /// Sum over steps of |p_bat - mean_bat| + |p_ewh - mean_ewh|.
    [[nodiscard]] double distance_to_mean(const FlexTrajectory& traj) const;

private:
    std::size_t horizon_ = 0;
    std::vector<FlexTrajectory> members_;
    std::vector<int> fitness_;
    std::vector<double> sum_bat_;
    std::vector<double> sum_ewh_;
};

/// Surplus series of every scenario, computed once.
struct ScenarioContext {
    std::vector<std::vector<double>> surplus;

    static ScenarioContext from(const ScenarioSet& scenarios);
    [[nodiscard]] int count() const { return static_cast<int>(surplus.size()); }
};

/// w + tau N(0,1); mutate_weights clamps this to [kWeightMin, kWeightMax].
[[nodiscard]] double mutate_weight_unclamped(double w, double tau, Rng& rng);
[[nodiscard]] Weights mutate_weights(const Weights& w, double tau, Rng& rng);
void mutate_weights(std::array<Weights, 2>& w, double tau, Rng& rng);

/// b_g + tau' N(0,1), independently per step and per dimension.
[[nodiscard]] FlexTrajectory perturb_global_best(const FlexTrajectory& global_best, double tau_prime, Rng& rng);

/// Nearest of {0, p_nom}.
[[nodiscard]] double quantize_ewh(double value, double p_nom);

/// Movement rule: inertia + memory + masked cooperation. Battery coordinates
/// are clamped to the power bounds, EWH coordinates re-quantized.
void move_particle(Particle& p, const FlexTrajectory& disturbed_best, double comm_factor, const HemsConfig& cfg,
                   Rng& rng);

[[nodiscard]] Score evaluate_score(const FlexTrajectory& traj, const ScenarioContext& ctx, const HemsConfig& cfg);
[[nodiscard]] int evaluate_fitness(const FlexTrajectory& traj, const ScenarioSet& scenarios, const HemsConfig& cfg);

/// Minimum fitness accepted as robust: ceil(tau * n_scen).
[[nodiscard]] int robust_threshold(int n_scen, double tau_scen);
[[nodiscard]] bool is_robust(int fitness, int n_scen, double tau_scen);

/// Member farthest from the set's mean. Ties keep the first member found.
/// Throws InputError on an empty set.
[[nodiscard]] FlexTrajectory select_global_best(const FeasibleSet& set);

/// True if `a` survives against `b`: the better score wins with probability
/// `win_prob`, equal scores are a fair coin.
[[nodiscard]] bool first_survives(const Score& a, const Score& b, double win_prob, Rng& rng);

[[nodiscard]] std::vector<Particle> stochastic_tournament(std::vector<Particle> parents,
                                                          std::vector<Particle> offspring, double win_prob,
                                                          Rng& rng);

/// Initial population inside the power bounds. A share of the particles have
/// p_bat zeroed on the surplus steps of `reference_net_load`.
[[nodiscard]] std::vector<Particle> seed_initial_population(std::span<const double> reference_net_load,
                                                            const EpsoConfig& epso, const HemsConfig& cfg);

/// Applies repair_trajectory against every scenario in which the trajectory
/// is penalty-free but breaks the PV-accommodation rule.
[[nodiscard]] FlexTrajectory repair_against_scenarios(const FlexTrajectory& traj, const ScenarioContext& ctx,
                                                      const HemsConfig& cfg);

struct IterationLog {
    int iteration = 0;
    std::size_t feasible = 0;
    double best_distance = 0.0;
    double mutation_rate = 0.0;
    int best_fitness = 0;
};

struct SearchResult {
    FeasibleSet feasible;
    std::vector<IterationLog> log;
    int iterations = 0;
    bool target_reached = false;
    std::optional<std::string> warning;
};

[[nodiscard]] SearchResult run_search(const EpsoConfig& epso, const ScenarioSet& scenarios, const HemsConfig& cfg);

}  // namespace hemsflex
