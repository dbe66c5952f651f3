#include "hemsflex/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hemsflex/errors.hpp"
#include "hemsflex/parallel.hpp"
#include "hemsflex/random.hpp"

namespace hemsflex {

void MarginalForecast::validate() const
{
    if (quantiles.empty())
        throw ParameterError("marginal for lead time " + std::to_string(lead_time) + " has no quantiles");
    for (std::size_t i = 0; i < quantiles.size(); ++i) {
        const auto [p, q] = quantiles[i];
        if (!(p > 0.0 && p < 1.0) || !std::isfinite(q))
            throw ParameterError("marginal for lead time " + std::to_string(lead_time) +
                                 ": probability must lie in (0,1) and value be finite");
        if (i > 0 && (p <= quantiles[i - 1].first || q < quantiles[i - 1].second))
            throw ParameterError("marginal for lead time " + std::to_string(lead_time) +
                                 " is not a monotone quantile function");
    }
}

double MarginalForecast::inverse_cdf(double probability) const
{
    if (probability <= quantiles.front().first) return quantiles.front().second;
    if (probability >= quantiles.back().first) return quantiles.back().second;
    auto hi = std::upper_bound(quantiles.begin(), quantiles.end(), probability,
                               [](double p, const auto& knot) { return p < knot.first; });
    auto lo = std::prev(hi);
    const double w = (probability - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
}

void CopulaConfig::validate() const
{
    if (horizon < 1) throw ParameterError("copula horizon must be >= 1");
    if (count < 1) throw ParameterError("scenario count must be >= 1");
    if (!(range > 0.0) || !std::isfinite(range)) throw ParameterError("correlation range must be positive");
}

std::vector<double> ScenarioSet::row(int m) const
{
    std::vector<double> out(static_cast<std::size_t>(horizon()));
    for (int k = 0; k < horizon(); ++k) out[static_cast<std::size_t>(k)] = values(m, k);
    return out;
}

ScenarioSet ScenarioSet::window(int first, int length) const
{
    if (first < 0 || length < 1 || first + length > horizon())
        throw InputError("scenario window [" + std::to_string(first) + ", " + std::to_string(first + length) +
                         ") outside horizon " + std::to_string(horizon()));
    return ScenarioSet{values.middleCols(first, length)};
}

Eigen::MatrixXd build_covariance(int horizon, double range)
{
    if (horizon < 1) throw ParameterError("covariance horizon must be >= 1");
    if (!(range > 0.0) || !std::isfinite(range)) throw ParameterError("correlation range must be positive");
    Eigen::MatrixXd cov(horizon, horizon);
    for (int i = 0; i < horizon; ++i)
        for (int j = 0; j < horizon; ++j) cov(i, j) = std::exp(-std::abs(i - j) / range);
    return cov;
}

Eigen::MatrixXd sample_gaussian_copula(const Eigen::MatrixXd& cov, int count, std::uint64_t seed,
                                       unsigned threads)
{
    if (cov.rows() != cov.cols() || cov.rows() < 1) throw InputError("covariance must be square and non-empty");
    if (count < 1) throw ParameterError("scenario count must be >= 1");
    if (!cov.isApprox(cov.transpose())) throw NumericalError("covariance is not symmetric");

    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        Eigen::MatrixXd jittered = cov;
        jittered.diagonal().array() += 1e-10;
        llt.compute(jittered);
        if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
    }
    const Eigen::MatrixXd lower = llt.matrixL();
    const auto dim = cov.rows();

    Eigen::MatrixXd z(count, dim);
    parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t m) {
        Rng rng = make_stream(seed, stream_domain::copula, m);
        Eigen::VectorXd white(dim);
        for (Eigen::Index k = 0; k < dim; ++k) white(k) = standard_normal(rng);
        z.row(static_cast<Eigen::Index>(m)) = (lower * white).transpose();
    });
    return z;
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

ScenarioSet transform_to_scenarios(const Eigen::MatrixXd& z, std::span<const MarginalForecast> marginals)
{
    if (static_cast<std::size_t>(z.cols()) != marginals.size())
        throw InputError("need one marginal per lead time: got " + std::to_string(marginals.size()) + " for " +
                         std::to_string(z.cols()) + " columns");
    for (const auto& marginal : marginals) marginal.validate();

    ScenarioSet out{Eigen::MatrixXd(z.rows(), z.cols())};
    for (Eigen::Index k = 0; k < z.cols(); ++k) {
        const auto& marginal = marginals[static_cast<std::size_t>(k)];
        for (Eigen::Index m = 0; m < z.rows(); ++m)
            out.values(m, k) = marginal.inverse_cdf(standard_normal_cdf(z(m, k)));
    }
    return out;
}

ScenarioSet generate_scenarios(const CopulaConfig& cfg, std::span<const MarginalForecast> marginals)
{
    cfg.validate();
    if (marginals.size() != static_cast<std::size_t>(cfg.horizon))
        throw InputError("marginal count " + std::to_string(marginals.size()) + " does not match horizon " +
                         std::to_string(cfg.horizon));
    const auto z = sample_gaussian_copula(build_covariance(cfg.horizon, cfg.range), cfg.count, cfg.seed,
                                          cfg.threads);
    return transform_to_scenarios(z, marginals);
}

std::vector<double> pv_surplus(std::span<const double> net_load)
{
    std::vector<double> out(net_load.size());
    std::transform(net_load.begin(), net_load.end(), out.begin(), [](double y) { return std::max(0.0, -y); });
    return out;
}

double variogram_score(const ScenarioSet& scenarios, std::span<const double> observed, double p)
{
    const int horizon = scenarios.horizon();
    if (horizon < 2) throw ParameterError("variogram score needs at least two lead times");
    if (!(p > 0.0)) throw ParameterError("variogram order p must be positive");
    if (observed.size() != static_cast<std::size_t>(horizon))
        throw InputError("observation length does not match scenario horizon");
    if (scenarios.count() < 1) throw InputError("variogram score needs at least one scenario");

    double score = 0.0;
    for (int i = 0; i < horizon; ++i) {
        for (int j = i + 1; j < horizon; ++j) {
            // mean of (obs - member) rather than obs - mean, so a perfect set scores exactly 0
            const double obs = std::pow(std::abs(observed[i] - observed[j]), p);
            double diff = 0.0;
            for (int m = 0; m < scenarios.count(); ++m)
                diff += obs - std::pow(std::abs(scenarios.values(m, i) - scenarios.values(m, j)), p);
            diff /= scenarios.count();
            score += diff * diff;
        }
    }
    return score;
}

}  // namespace hemsflex
