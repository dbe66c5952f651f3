#include <doctest.h>

#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "hemsflex/errors.hpp"
#include "hemsflex/scenario.hpp"
#include "support.hpp"

using namespace hemsflex;

namespace {

MarginalForecast knots(std::vector<std::pair<double, double>> q)
{
    MarginalForecast m;
    m.quantiles = std::move(q);
    return m;
}

double inv_phi(double p) { return boost::math::quantile(boost::math::normal(), p); }

}  // namespace

TEST_SUITE("scenario")
{
    TEST_CASE("covariance entries")
    {
        const auto c = build_covariance(6, 2.0);
        for (int k = 0; k < 6; ++k) CHECK(c(k, k) == 1.0);
        CHECK(c(0, 2) == doctest::Approx(0.367879).epsilon(1e-6));
        CHECK(c(3, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

        const auto tiny = build_covariance(4, 1e-3);
        CHECK(tiny(0, 1) < 1e-300);
        CHECK(tiny(1, 1) == 1.0);

        CHECK_THROWS_AS((void)build_covariance(4, 0.0), ParameterError);
        CHECK_THROWS_AS((void)build_covariance(4, -1.0), ParameterError);
    }

    TEST_CASE("covariance is symmetric, unit diagonal and positive definite")
    {
        for (int t : {1, 2, 7, 24, 64})
            for (double nu : {0.5, 1.0, 4.0, 16.0}) {
                const auto c = build_covariance(t, nu);
                CHECK(c.isApprox(c.transpose(), 0.0));
                CHECK((c.diagonal().array() == 1.0).all());
                Eigen::LLT<Eigen::MatrixXd> llt(c);
                CHECK(llt.info() == Eigen::Success);
            }
    }

    TEST_CASE("identity covariance gives standard normal columns")
    {
        const auto z = sample_gaussian_copula(Eigen::MatrixXd::Identity(6, 6), 100000, 11);
        for (int k = 0; k < 6; ++k) {
            const Eigen::VectorXd c = z.col(k);
            const double mean = c.mean();
            const Eigen::ArrayXd d = c.array() - mean;
            const double var = d.square().mean();
            const double skew = d.cube().mean() / std::pow(var, 1.5);
            const double kurt = d.square().square().mean() / (var * var) - 3.0;
            CHECK(std::abs(mean) < 0.02);
            CHECK(std::abs(var - 1.0) < 0.03);
            CHECK(std::abs(skew) < 0.05);
            CHECK(std::abs(kurt) < 0.1);
        }
        // and no cross-correlation
        CHECK(std::abs(testing::column_correlation(z, 0, 1)) < 0.02);
    }

    TEST_CASE("exponential covariance reproduces lag correlations")
    {
        const auto z = sample_gaussian_copula(build_covariance(12, 4.0), 100000, 5);
        CHECK(std::abs(testing::column_correlation(z, 3, 4) - std::exp(-0.25)) < 0.02);
        for (int lag : {1, 2, 4}) {
            double sum = 0.0;
            for (int k = 0; k + lag < 12; ++k) sum += testing::column_correlation(z, k, k + lag);
            CHECK(std::abs(sum / (12 - lag) - std::exp(-lag / 4.0)) < 0.03);
        }
    }

    TEST_CASE("sampling is reproducible and independent of thread count")
    {
        const auto cov = build_covariance(10, 3.0);
        const auto a = sample_gaussian_copula(cov, 500, 42, 1);
        const auto b = sample_gaussian_copula(cov, 500, 42, 1);
        const auto c = sample_gaussian_copula(cov, 500, 42, 4);
        CHECK(a == b);
        CHECK(a == c);
        CHECK(a != sample_gaussian_copula(cov, 500, 43, 1));
    }

    TEST_CASE("marginal transform")
    {
        const auto m = knots({{0.1, 0.4}, {0.5, 1.2}, {0.9, 2.5}});
        Eigen::MatrixXd z(1, 1);
        z(0, 0) = 0.0;
        std::vector<MarginalForecast> ms{m};
        CHECK(transform_to_scenarios(z, ms).values(0, 0) == doctest::Approx(1.2).epsilon(1e-12));

        ms = {knots({{0.1, 0.0}, {0.9, 2.0}})};
        z(0, 0) = inv_phi(0.9);
        CHECK(transform_to_scenarios(z, ms).values(0, 0) == doctest::Approx(2.0).epsilon(1e-9));
        z(0, 0) = 5.0;  // beyond the last knot: clamped
        CHECK(transform_to_scenarios(z, ms).values(0, 0) == 2.0);
        z(0, 0) = -5.0;
        CHECK(transform_to_scenarios(z, ms).values(0, 0) == 0.0);

        ms = {knots({{0.05, 0.7}, {0.5, 0.7}, {0.95, 0.7}})};
        const auto zz = sample_gaussian_copula(Eigen::MatrixXd::Identity(1, 1), 50, 3);
        const auto s = transform_to_scenarios(zz, ms);
        CHECK((s.values.array() == 0.7).all());
    }

    TEST_CASE("marginal transform is monotone")
    {
        const auto m = knots({{0.05, -1.0}, {0.25, -0.2}, {0.5, 0.0}, {0.75, 0.0}, {0.95, 3.0}});
        Rng rng = make_stream(7, stream_domain::test, 0);
        std::normal_distribution<double> n(0.0, 2.0);
        for (int i = 0; i < 2000; ++i) {
            double a = n(rng), b = n(rng);
            if (a > b) std::swap(a, b);
            CHECK(m.inverse_cdf(standard_normal_cdf(a)) <= m.inverse_cdf(standard_normal_cdf(b)));
        }
    }

    TEST_CASE("invalid marginals are rejected")
    {
        CHECK_THROWS_AS(knots({}).validate(), ParameterError);
        CHECK_THROWS_AS(knots({{0.5, 1.0}, {0.5, 2.0}}).validate(), ParameterError);
        CHECK_THROWS_AS(knots({{0.2, 1.0}, {0.6, 0.5}}).validate(), ParameterError);
        CHECK_THROWS_AS(knots({{0.0, 1.0}}).validate(), ParameterError);
        Eigen::MatrixXd z = Eigen::MatrixXd::Zero(2, 3);
        std::vector<MarginalForecast> two{knots({{0.5, 1.0}}), knots({{0.5, 1.0}})};
        CHECK_THROWS_AS((void)transform_to_scenarios(z, two), InputError);
    }

    TEST_CASE("pv surplus")
    {
        const std::vector<double> a{0.5, -0.3, 0.0};
        CHECK(pv_surplus(a) == std::vector<double>{0.0, 0.3, 0.0});
        const std::vector<double> b{0.1, 2.0, 0.4};
        CHECK(pv_surplus(b) == std::vector<double>(3, 0.0));
    }

    TEST_CASE("synthetic day: surplus only where net-load is negative, around midday")
    {
        const auto ms = synthetic::marginals();
        std::vector<double> median;
        for (const auto& m : ms) median.push_back(m.inverse_cdf(0.5));
        const auto s = pv_surplus(median);
        for (std::size_t h = 0; h < s.size(); ++h) {
            CHECK((s[h] > 0.0) == (median[h] < 0.0));
            if (s[h] > 0.0) {
                CHECK(h >= 7 * 4);
                CHECK(h < 14 * 4);
            }
        }
    }

    TEST_CASE("variogram score")
    {
        ScenarioSet same{Eigen::MatrixXd(3, 4)};
        same.values << 1, 2, 3, 4, 1, 2, 3, 4, 1, 2, 3, 4;
        const std::vector<double> obs{1, 2, 3, 4};
        CHECK(variogram_score(same, obs) == 0.0);

        ScenarioSet one{Eigen::MatrixXd(1, 2)};
        one.values << 0, 1;
        const std::vector<double> o2{0, 1};
        CHECK(variogram_score(one, o2, 1.0) == 0.0);

        ScenarioSet two{Eigen::MatrixXd(2, 2)};
        two.values << 0, 0, 0, 2;
        const std::vector<double> o3{0, 2};
        CHECK(variogram_score(two, o3, 1.0) == doctest::Approx(1.0));

        ScenarioSet short_set{Eigen::MatrixXd::Zero(2, 1)};
        const std::vector<double> o1{0.0};
        CHECK_THROWS_AS((void)variogram_score(short_set, o1), ParameterError);
    }

    TEST_CASE("generated scenario set has the configured shape and is reproducible")
    {
        const auto ms = synthetic::marginals();
        CopulaConfig cc;
        cc.count = 1;
        const auto one = generate_scenarios(cc, ms);
        CHECK(one.count() == 1);
        CHECK(one.horizon() == 96);
        cc.count = 100;
        const auto a = generate_scenarios(cc, ms);
        cc.threads = 3;
        const auto b = generate_scenarios(cc, ms);
        CHECK(a.values == b.values);
        CHECK(a.values.allFinite());
        CHECK(a.window(36, 16).horizon() == 16);
        CHECK(a.window(36, 16).values(5, 0) == a.values(5, 36));
    }
}

TEST_CASE("non positive definite covariance fails to factor")
{
    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS((void)sample_gaussian_copula(bad, 10, 1), NumericalError);
}
