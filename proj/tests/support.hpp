#pragma once

// Shared fixtures for the test binaries.

#include <cmath>
#include <random>
#include <vector>

#include "hemsflex/hems.hpp"
#include "hemsflex/random.hpp"
#include "hemsflex/scenario.hpp"
#include "hemsflex/synthetic.hpp"

namespace hemsflex::testing {

/// Uniform battery set-points over the power band, EWH on with probability `ewh_on`.
inline FlexTrajectory random_trajectory(std::size_t horizon, const HemsConfig& cfg, Rng& rng,
                                        double bat_scale = 1.0, double ewh_on = 0.5)
{
    // a negative scale draws charging set-points only
    const double lo = bat_scale < 0.0 ? 0.0 : -bat_scale * cfg.battery.p_discharge_max;
    std::uniform_real_distribution<double> power(lo, std::abs(bat_scale) * cfg.battery.p_charge_max);
    std::bernoulli_distribution on(ewh_on);
    FlexTrajectory t;
    for (std::size_t h = 0; h < horizon; ++h) {
        t.p_bat.push_back(power(rng));
        t.p_ewh.push_back(on(rng) ? cfg.ewh.p_nom : 0.0);
    }
    return t;
}

inline FlexTrajectory zeros(std::size_t horizon) { return {std::vector<double>(horizon, 0.0), std::vector<double>(horizon, 0.0)}; }

/// Synthetic day restricted to steps [first, first + length).
struct WindowInstance {
    HemsConfig cfg;
    ScenarioSet scenarios;
    std::vector<double> median;
};

inline WindowInstance window_instance(int first, int length, int count = 100, std::uint64_t seed = 1)
{
    const auto marginals = synthetic::marginals();
    CopulaConfig cc;
    cc.horizon = static_cast<int>(marginals.size());
    cc.count = count;
    cc.seed = seed;
    WindowInstance inst;
    inst.scenarios = generate_scenarios(cc, marginals).window(first, length);
    inst.cfg = synthetic::reference_config().window(first, length);
    for (int k = first; k < first + length; ++k) inst.median.push_back(marginals[static_cast<std::size_t>(k)].inverse_cdf(0.5));
    return inst;
}

/// Sample Pearson correlation of two columns.
inline double column_correlation(const Eigen::MatrixXd& z, int a, int b)
{
    const Eigen::VectorXd x = z.col(a).array() - z.col(a).mean();
    const Eigen::VectorXd y = z.col(b).array() - z.col(b).mean();
    return x.dot(y) / std::sqrt(x.squaredNorm() * y.squaredNorm());
}

}  // namespace hemsflex::testing
