#include "hemsflex/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <cstdio>
#include <sstream>

#include <Eigen/Dense>

#include "hemsflex/epso.hpp"
#include "hemsflex/errors.hpp"
#include "hemsflex/random.hpp"

namespace hemsflex {

InfeasibleSample generate_infeasible_set(std::size_t count, const HemsConfig& cfg, const ScenarioSet& scenarios,
                                         double tau_scen, std::uint64_t seed, long max_draws)
{
    cfg.validate();
    const auto horizon = static_cast<std::size_t>(scenarios.horizon());
    const int threshold = robust_threshold(scenarios.count(), tau_scen);
    Rng rng = make_stream(seed, stream_domain::infeasible, 0);
    std::uniform_real_distribution<double> power(-cfg.battery.p_discharge_max, cfg.battery.p_charge_max);
    std::bernoulli_distribution on(0.5);

    InfeasibleSample sample;
    while (sample.trajectories.size() < count) {
        if (sample.draws >= max_draws) {
            if (sample.trajectories.empty())
                throw NumericalError("no infeasible trajectory found in " + std::to_string(max_draws) +
                                     " draws; the instance is too permissive");
            break;
        }
        ++sample.draws;
        FlexTrajectory traj{std::vector<double>(horizon), std::vector<double>(horizon)};
        for (std::size_t h = 0; h < horizon; ++h) traj.p_bat[h] = power(rng);
        for (std::size_t h = 0; h < horizon; ++h) traj.p_ewh[h] = on(rng) ? cfg.ewh.p_nom : 0.0;
        if (oracle_check(traj, scenarios, cfg) < threshold) sample.trajectories.push_back(std::move(traj));
    }
    return sample;
}

std::vector<FlexTrajectory> semi_random_baseline(std::size_t count, const HemsConfig& cfg,
                                                 std::span<const double> net_load, std::uint64_t seed,
                                                 long max_restarts)
{
    cfg.validate();
    const std::size_t horizon = net_load.size();
    if (cfg.ewh.draw_profile.size() != horizon) throw InputError("draw profile length does not match net-load");
    const auto surplus = pv_surplus(net_load);
    const auto& bat = cfg.battery;
    const double dt = cfg.dt;
    constexpr double margin = 1e-7;

    Rng rng = make_stream(seed, stream_domain::baseline, 0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<FlexTrajectory> out;
    long restarts = 0;
    while (out.size() < count) {
        FlexTrajectory traj{std::vector<double>(horizon), std::vector<double>(horizon)};
        double soc = bat.soc_init;
        double theta = cfg.ewh.theta_init;
        CapacityTracker tracker = CapacityTracker::initial(bat);
        bool dead = false;

        for (std::size_t h = 0; h < horizon && !dead; ++h) {
            double levels[2];
            int n_levels = 0;
            for (double level : {0.0, cfg.ewh.p_nom}) {
                const double next = ewh_step(theta, level, cfg.ewh.draw_profile[h], dt, cfg.ewh);
                if (next >= cfg.ewh.theta_min + margin && next <= cfg.ewh.theta_max - margin) levels[n_levels++] = level;
            }
            if (n_levels == 0) {
                dead = true;
                break;
            }
            const double ewh = levels[n_levels == 1 ? 0 : (unit(rng) < 0.5 ? 0 : 1)];

            const double before = tracker.capacity;
            tracker = update_capacity(tracker, surplus[h], ewh, bat, dt);
            const double absorbed = surplus[h] > 0.0 ? (before - tracker.capacity) / dt : 0.0;

            // Range of total battery power, then shifted by the absorbed surplus.
            const double total_hi = std::min(max_charge_power(std::clamp(soc, 0.0, bat.capacity), bat),
                                             (bat.soc_max() - soc) / (bat.efficiency * dt));
            const double total_lo = -(soc - bat.soc_min()) * bat.efficiency / dt;
            double lo = std::max(-bat.p_discharge_max, total_lo - absorbed) + margin;
            double hi = std::min(bat.p_charge_max, total_hi - absorbed) - margin;
            if (absorbed > 0.0) lo = std::max(lo, 0.0);
            if (lo > hi) {
                dead = true;
                break;
            }
            const double p = lo + unit(rng) * (hi - lo);
            traj.p_bat[h] = p;
            traj.p_ewh[h] = ewh;
            soc = battery_step(soc, p + absorbed, dt, bat);
            theta = ewh_step(theta, ewh, cfg.ewh.draw_profile[h], dt, cfg.ewh);
        }
        if (dead) {
            if (++restarts > max_restarts)
                throw NumericalError("semi-random baseline hit " + std::to_string(max_restarts) + " dead ends");
            continue;
        }
        out.push_back(std::move(traj));
    }
    return out;
}

DiversityReport pca_diversity(const std::vector<FlexTrajectory>& set, double low, double high)
{
    if (set.size() < 2) throw InputError("PCA needs at least two trajectories");
    const auto horizon = static_cast<Eigen::Index>(set.front().horizon());
    Eigen::MatrixXd data(static_cast<Eigen::Index>(set.size()), horizon);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto combined = set[i].combined();
        if (static_cast<Eigen::Index>(combined.size()) != horizon) throw InputError("trajectories differ in horizon");
        for (Eigen::Index k = 0; k < horizon; ++k) data(static_cast<Eigen::Index>(i), k) = combined[static_cast<std::size_t>(k)];
    }
    const Eigen::RowVectorXd mean = data.colwise().mean();
    data.rowwise() -= mean;
    const Eigen::MatrixXd cov = (data.transpose() * data) / static_cast<double>(set.size() - 1);

    DiversityReport report;
    const double total = cov.trace();
    if (!(total > 1e-12)) {
        report.degenerate = true;
        return report;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalError("PCA eigendecomposition failed");
    std::vector<double> values(eig.eigenvalues().data(), eig.eigenvalues().data() + eig.eigenvalues().size());
    std::sort(values.begin(), values.end(), std::greater<>());

    const double sum = std::accumulate(values.begin(), values.end(), 0.0, [](double acc, double v) {
        return acc + std::max(0.0, v);
    });
    double cumulative = 0.0;
    report.n_components_50 = report.n_components_80 = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double share = std::max(0.0, values[i]) / sum;
        report.explained.push_back(share);
        cumulative += share;
        if (report.n_components_50 == 0 && cumulative >= low - 1e-12) report.n_components_50 = static_cast<int>(i + 1);
        if (report.n_components_80 == 0 && cumulative >= high - 1e-12) report.n_components_80 = static_cast<int>(i + 1);
    }
    if (report.n_components_50 == 0) report.n_components_50 = static_cast<int>(values.size());
    if (report.n_components_80 == 0) report.n_components_80 = static_cast<int>(values.size());
    return report;
}

double ConfusionRow::feasible_error_pct() const
{
    const auto n = feasible_correct + feasible_incorrect;
    return n ? 100.0 * static_cast<double>(feasible_incorrect) / static_cast<double>(n) : 0.0;
}

double ConfusionRow::infeasible_error_pct() const
{
    const auto n = infeasible_correct + infeasible_incorrect;
    return n ? 100.0 * static_cast<double>(infeasible_incorrect) / static_cast<double>(n) : 0.0;
}

ConfusionRow confusion_table(const SvddModel& model, const std::vector<FlexTrajectory>& feasible,
                             const std::vector<FlexTrajectory>& infeasible)
{
    ConfusionRow row;
    row.kernel = to_string(model.kernel.kind);
    row.gamma = model.kernel.gamma;
    row.nu = model.nu;
    for (const auto& traj : feasible)
        (classify(model, traj) == Verdict::feasible ? row.feasible_correct : row.feasible_incorrect)++;
    for (const auto& traj : infeasible)
        (classify(model, traj) == Verdict::infeasible ? row.infeasible_correct : row.infeasible_incorrect)++;
    return row;
}

std::string confusion_csv(const std::vector<ConfusionRow>& rows)
{
    std::ostringstream out;
    out << "kernel,gamma,nu,feasible_correct,feasible_incorrect,feasible_error_pct,"
           "infeasible_correct,infeasible_incorrect,infeasible_error_pct\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.6g,%.6g,%zu,%zu,%.2f,%zu,%zu,%.2f\n", r.kernel.c_str(), r.gamma, r.nu,
                      r.feasible_correct, r.feasible_incorrect, r.feasible_error_pct(), r.infeasible_correct,
                      r.infeasible_incorrect, r.infeasible_error_pct());
        out << buf;
    }
    return out.str();
}

}  // namespace hemsflex
