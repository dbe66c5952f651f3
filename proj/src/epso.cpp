#include "hemsflex/epso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hemsflex/errors.hpp"
#include "hemsflex/parallel.hpp"

namespace hemsflex {

void EpsoConfig::validate() const
{
    if (pop_size < 1) throw ParameterError("population size must be >= 1");
    if (max_iters < 0) throw ParameterError("max_iters must be >= 0");
    if (target_feasible < 1) throw ParameterError("target_feasible must be >= 1");
    if (!(tau_scen > 0.0 && tau_scen <= 1.0)) throw ParameterError("tau_scen must lie in (0,1]");
    if (!(mutation_min <= mutation_max) || mutation_min < 0.0)
        throw ParameterError("mutation rates must satisfy 0 <= min <= max");
    if (!(comm_factor >= 0.0 && comm_factor <= 1.0)) throw ParameterError("comm_factor must lie in [0,1]");
    if (!(tournament_win >= 0.0 && tournament_win <= 1.0)) throw ParameterError("tournament_win must lie in [0,1]");
    if (tau_learn < 0.0 || tau_global < 0.0) throw ParameterError("learning parameters must be non-negative");
}

double EpsoConfig::mutation_rate(int iter) const
{
    if (max_iters <= 1) return mutation_max;
    const double frac = std::clamp(static_cast<double>(iter) / (max_iters - 1), 0.0, 1.0);
    return mutation_max - frac * (mutation_max - mutation_min);
}

bool better(const Score& a, const Score& b)
{
    if (a.fitness != b.fitness) return a.fitness > b.fitness;
    return a.penalty < b.penalty;
}

FeasibleSet::FeasibleSet(std::size_t horizon) : horizon_(horizon), sum_bat_(horizon, 0.0), sum_ewh_(horizon, 0.0) {}

bool FeasibleSet::insert(const FlexTrajectory& traj, int fitness, double dedup_tol)
{
    if (traj.horizon() != horizon_) throw InputError("trajectory horizon does not match feasible set");
    for (const auto& member : members_) {
        bool close = true;
        for (std::size_t h = 0; h < horizon_ && close; ++h)
            close = std::abs(member.p_bat[h] - traj.p_bat[h]) < dedup_tol &&
                    std::abs(member.p_ewh[h] - traj.p_ewh[h]) < dedup_tol;
        if (close) return false;
    }
    members_.push_back(traj);
    fitness_.push_back(fitness);
    for (std::size_t h = 0; h < horizon_; ++h) {
        sum_bat_[h] += traj.p_bat[h];
        sum_ewh_[h] += traj.p_ewh[h];
    }
    return true;
}

FlexTrajectory FeasibleSet::mean_position() const
{
    FlexTrajectory mean{std::vector<double>(horizon_, 0.0), std::vector<double>(horizon_, 0.0)};
    if (members_.empty()) return mean;
    const double n = static_cast<double>(members_.size());
    for (std::size_t h = 0; h < horizon_; ++h) {
        mean.p_bat[h] = sum_bat_[h] / n;
        mean.p_ewh[h] = sum_ewh_[h] / n;
    }
    return mean;
}

double FeasibleSet::distance_to_mean(const FlexTrajectory& traj) const
{
    const auto mean = mean_position();
    double d = 0.0;
    for (std::size_t h = 0; h < horizon_; ++h)
        d += std::abs(traj.p_bat[h] - mean.p_bat[h]) + std::abs(traj.p_ewh[h] - mean.p_ewh[h]);
    return d;
}

ScenarioContext ScenarioContext::from(const ScenarioSet& scenarios)
{
    ScenarioContext ctx;
    ctx.surplus.reserve(static_cast<std::size_t>(scenarios.count()));
    for (int m = 0; m < scenarios.count(); ++m) ctx.surplus.push_back(pv_surplus(scenarios.row(m)));
    return ctx;
}

double mutate_weight_unclamped(double w, double tau, Rng& rng) { return w + tau * standard_normal(rng); }

Weights mutate_weights(const Weights& w, double tau, Rng& rng)
{
    auto mutate = [&](double value) {
        return std::clamp(mutate_weight_unclamped(value, tau, rng), kWeightMin, kWeightMax);
    };
    Weights out;
    out.inertia = mutate(w.inertia);
    out.memory = mutate(w.memory);
    out.cooperation = mutate(w.cooperation);
    return out;
}

void mutate_weights(std::array<Weights, 2>& w, double tau, Rng& rng)
{
    for (auto& dim : w) dim = mutate_weights(dim, tau, rng);
}

FlexTrajectory perturb_global_best(const FlexTrajectory& global_best, double tau_prime, Rng& rng)
{
    FlexTrajectory out = global_best;
    for (auto& value : out.p_bat) value += tau_prime * standard_normal(rng);
    for (auto& value : out.p_ewh) value += tau_prime * standard_normal(rng);
    return out;
}

double quantize_ewh(double value, double p_nom) { return value >= 0.5 * p_nom ? p_nom : 0.0; }

void move_particle(Particle& p, const FlexTrajectory& disturbed_best, double comm_factor, const HemsConfig& cfg,
                   Rng& rng)
{
    std::bernoulli_distribution communicate(comm_factor);
    const auto& bat = cfg.battery;
    const double v_bat_max = bat.p_charge_max + bat.p_discharge_max;
    const double v_ewh_max = cfg.ewh.p_nom;

    auto step = [&](double& x, double& v, double best, double global, const Weights& w, double v_max) {
        const double mask = communicate(rng) ? 1.0 : 0.0;
        v = w.inertia * v + w.memory * (best - x) + w.cooperation * mask * (global - x);
        v = std::clamp(v, -v_max, v_max);
        x += v;
    };

    for (std::size_t h = 0; h < p.x.horizon(); ++h) {
        step(p.x.p_bat[h], p.v_bat[h], p.best.p_bat[h], disturbed_best.p_bat[h], p.weights[0], v_bat_max);
        p.x.p_bat[h] = std::clamp(p.x.p_bat[h], -bat.p_discharge_max, bat.p_charge_max);
    }
    for (std::size_t h = 0; h < p.x.horizon(); ++h) {
        step(p.x.p_ewh[h], p.v_ewh[h], p.best.p_ewh[h], disturbed_best.p_ewh[h], p.weights[1], v_ewh_max);
        p.x.p_ewh[h] = quantize_ewh(p.x.p_ewh[h], cfg.ewh.p_nom);
    }
}

Score evaluate_score(const FlexTrajectory& traj, const ScenarioContext& ctx, const HemsConfig& cfg)
{
    Score score;
    for (const auto& surplus : ctx.surplus) {
        const auto sim = simulate(traj, surplus, cfg);
        score.penalty += sim.penalty + sim.pv_violations;
        score.fitness += sim.compliant() ? 1 : 0;
    }
    return score;
}

int evaluate_fitness(const FlexTrajectory& traj, const ScenarioSet& scenarios, const HemsConfig& cfg)
{
    if (scenarios.count() < 1) throw InputError("fitness needs at least one scenario");
    return evaluate_score(traj, ScenarioContext::from(scenarios), cfg).fitness;
}

int robust_threshold(int n_scen, double tau_scen)
{
    // The slack absorbs products such as 0.9 * 100 = 90.00000000000001.
    return static_cast<int>(std::ceil(tau_scen * n_scen - 1e-9));
}

bool is_robust(int fitness, int n_scen, double tau_scen) { return fitness >= robust_threshold(n_scen, tau_scen); }

FlexTrajectory select_global_best(const FeasibleSet& set)
{
    if (set.empty()) throw InputError("cannot select a global best from an empty feasible set");
    const auto mean = set.mean_position();
    const auto& members = set.trajectories();
    std::size_t best = 0;
    double best_distance = -1.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        double d = 0.0;
        for (std::size_t h = 0; h < mean.horizon(); ++h)
            d += std::abs(members[i].p_bat[h] - mean.p_bat[h]) + std::abs(members[i].p_ewh[h] - mean.p_ewh[h]);
        if (d > best_distance) {
            best_distance = d;
            best = i;
        }
    }
    return members[best];
}

bool first_survives(const Score& a, const Score& b, double win_prob, Rng& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    if (a == b) return u < 0.5;
    return better(a, b) ? u < win_prob : u >= win_prob;
}

std::vector<Particle> stochastic_tournament(std::vector<Particle> parents, std::vector<Particle> offspring,
                                            double win_prob, Rng& rng)
{
    if (parents.size() != offspring.size()) throw InputError("tournament needs paired populations");
    for (std::size_t i = 0; i < parents.size(); ++i)
        if (!first_survives(parents[i].score, offspring[i].score, win_prob, rng)) parents[i] = std::move(offspring[i]);
    return parents;
}

std::vector<Particle> seed_initial_population(std::span<const double> reference_net_load, const EpsoConfig& epso,
                                              const HemsConfig& cfg)
{
    const std::size_t horizon = reference_net_load.size();
    const auto surplus = pv_surplus(reference_net_load);
    const auto& bat = cfg.battery;
    const int zeroed = static_cast<int>(std::lround(epso.seed_zero_fraction * epso.pop_size));

    std::vector<Particle> pop(static_cast<std::size_t>(epso.pop_size));
    for (std::size_t i = 0; i < pop.size(); ++i) {
        Rng rng = make_stream(epso.seed, stream_domain::epso_seed, i);
        std::uniform_real_distribution<double> power(-bat.p_discharge_max, bat.p_charge_max);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double duty = unit(rng) * epso.seed_ewh_on_max;
        std::bernoulli_distribution ewh_on(duty);

        Particle& p = pop[i];
        p.x.p_bat.resize(horizon);
        p.x.p_ewh.resize(horizon);
        for (std::size_t h = 0; h < horizon; ++h) {
            p.x.p_bat[h] = power(rng);
            p.x.p_ewh[h] = ewh_on(rng) ? cfg.ewh.p_nom : 0.0;
        }
        if (static_cast<int>(i) < zeroed)
            for (std::size_t h = 0; h < horizon; ++h)
                if (surplus[h] > 0.0) p.x.p_bat[h] = 0.0;
        p.v_bat.assign(horizon, 0.0);
        p.v_ewh.assign(horizon, 0.0);
        for (auto& w : p.weights) w = {unit(rng), unit(rng), unit(rng)};
        p.best = p.x;
    }
    return pop;
}

FlexTrajectory repair_against_scenarios(const FlexTrajectory& traj, const ScenarioContext& ctx, const HemsConfig& cfg)
{
    FlexTrajectory out = traj;
    for (const auto& surplus : ctx.surplus) {
        const auto sim = simulate(out, surplus, cfg);
        if (sim.penalty == 0.0 && sim.pv_violations > 0) out = repair_trajectory(out, surplus, cfg);
    }
    return out;
}

namespace {

void refresh_personal_best(Particle& p)
{
    if (!better(p.best_score, p.score)) {
        p.best = p.x;
        p.best_score = p.score;
    }
}

std::size_t best_particle(const std::vector<Particle>& pop)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
        if (better(pop[i].best_score, pop[best].best_score)) best = i;
    return best;
}

}  // namespace

SearchResult run_search(const EpsoConfig& epso, const ScenarioSet& scenarios, const HemsConfig& cfg)
{
    epso.validate();
    cfg.validate();
    if (scenarios.count() < 1) throw InputError("search needs at least one scenario");
    const auto horizon = static_cast<std::size_t>(scenarios.horizon());
    if (cfg.ewh.draw_profile.size() != horizon)
        throw InputError("draw profile length does not match scenario horizon");

    const auto ctx = ScenarioContext::from(scenarios);
    const int n_scen = ctx.count();
    const int threshold = robust_threshold(n_scen, epso.tau_scen);

    SearchResult result;
    result.feasible = FeasibleSet(horizon);
    auto& feasible = result.feasible;

    std::vector<Particle> pop = seed_initial_population(scenarios.row(0), epso, cfg);
    std::vector<Rng> rngs;
    rngs.reserve(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) rngs.push_back(make_stream(epso.seed, stream_domain::epso_particle, i));

    parallel_for(pop.size(), epso.threads, [&](std::size_t i) {
        Particle& p = pop[i];
        p.x = repair_against_scenarios(p.x, ctx, cfg);
        p.score = evaluate_score(p.x, ctx, cfg);
        p.best = p.x;
        p.best_score = p.score;
    });
    for (const auto& p : pop)
        if (p.score.fitness >= threshold) feasible.insert(p.x, p.score.fitness, epso.dedup_tol);

    std::vector<Particle> offspring(pop.size());
    int iter = 0;
    for (; iter < epso.max_iters && feasible.size() < static_cast<std::size_t>(epso.target_feasible); ++iter) {
        const double rate = epso.mutation_rate(iter);
        const FlexTrajectory global_best =
            feasible.empty() ? pop[best_particle(pop)].best : select_global_best(feasible);

        parallel_for(pop.size(), epso.threads, [&](std::size_t i) {
            Rng& rng = rngs[i];
            Particle& parent = pop[i];
            Particle child = parent;
            mutate_weights(child.weights, rate * epso.tau_learn, rng);
            for (Particle* p : {&parent, &child}) {
                const auto disturbed = perturb_global_best(global_best, rate * epso.tau_global, rng);
                move_particle(*p, disturbed, epso.comm_factor, cfg, rng);
                p->x = repair_against_scenarios(p->x, ctx, cfg);
                p->score = evaluate_score(p->x, ctx, cfg);
                refresh_personal_best(*p);
            }
            offspring[i] = std::move(child);
        });

        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (pop[i].score.fitness >= threshold) feasible.insert(pop[i].x, pop[i].score.fitness, epso.dedup_tol);
            if (offspring[i].score.fitness >= threshold)
                feasible.insert(offspring[i].x, offspring[i].score.fitness, epso.dedup_tol);
            if (!first_survives(pop[i].score, offspring[i].score, epso.tournament_win, rngs[i]))
                pop[i] = std::move(offspring[i]);
        }

        IterationLog entry;
        entry.iteration = iter + 1;
        entry.feasible = feasible.size();
        entry.mutation_rate = rate;
        entry.best_distance = feasible.empty() ? 0.0 : feasible.distance_to_mean(select_global_best(feasible));
        entry.best_fitness = pop[best_particle(pop)].best_score.fitness;
        result.log.push_back(entry);
    }

    result.iterations = iter;
    result.target_reached = feasible.size() >= static_cast<std::size_t>(epso.target_feasible);
    if (!result.target_reached)
        result.warning = "target of " + std::to_string(epso.target_feasible) + " robust trajectories not reached: " +
                         std::to_string(feasible.size()) + " found in " + std::to_string(iter) + " iterations";
    return result;
}

}  // namespace hemsflex
