#pragma once

// Net-load scenario generation: per-lead-time marginal forecasts coupled
// through a Gaussian copula with an exponential covariance structure.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hemsflex {

/// Forecast distribution for one lead time, given as quantile knots.
struct MarginalForecast {
    int lead_time = 1;  // 1-based
    /// (probability, net-load kW); probabilities strictly increasing and
    /// values non-decreasing.
    std::vector<std::pair<double, double>> quantiles;

    /// Throws ParameterError if the knot list is empty or not monotone.
    void validate() const;

    /// Inverse CDF by piecewise-linear interpolation between knots.
    /// Probabilities outside the knot range clamp to the extreme knots.
    [[nodiscard]] double inverse_cdf(double probability) const;
};

struct CopulaConfig {
    int horizon = 96;
    int count = 100;
    double range = 4.0;  // correlation range, in time steps
    std::uint64_t seed = 1;
    unsigned threads = 1;

    void validate() const;
};

/// M x T matrix of net-load scenarios in kW (net-load = load - PV).
struct ScenarioSet {
    Eigen::MatrixXd values;

    [[nodiscard]] int count() const { return static_cast<int>(values.rows()); }
    [[nodiscard]] int horizon() const { return static_cast<int>(values.cols()); }
    [[nodiscard]] std::vector<double> row(int m) const;
    /// Columns [first, first + length) of every scenario.
    [[nodiscard]] ScenarioSet window(int first, int length) const;
};

/// cov(k1, k2) = exp(-|k1 - k2| / range).
[[nodiscard]] Eigen::MatrixXd build_covariance(int horizon, double range);

/// M rows of zero-mean Gaussian vectors with covariance `cov`. Row m uses its
/// own RNG stream, so the result does not depend on `threads`.
[[nodiscard]] Eigen::MatrixXd sample_gaussian_copula(const Eigen::MatrixXd& cov, int count,
                                                     std::uint64_t seed, unsigned threads = 1);

/// y[m][k] = F_k^{-1}(Phi(z[m][k])).
[[nodiscard]] ScenarioSet transform_to_scenarios(const Eigen::MatrixXd& z,
                                                 std::span<const MarginalForecast> marginals);

/// Full pipeline: covariance, Gaussian layer, marginal transform.
[[nodiscard]] ScenarioSet generate_scenarios(const CopulaConfig& cfg,
                                             std::span<const MarginalForecast> marginals);

/// Surplus PV power: max(0, -net_load) per step.
[[nodiscard]] std::vector<double> pv_surplus(std::span<const double> net_load);

/// p-variogram score of a scenario set against an observed path. Lower is better.
[[nodiscard]] double variogram_score(const ScenarioSet& scenarios, std::span<const double> observed,
                                     double p = 0.5);

[[nodiscard]] double standard_normal_cdf(double z);

}  // namespace hemsflex
