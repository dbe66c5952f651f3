#include <doctest.h>

#include <cmath>
#include <set>

#include "hemsflex/analysis.hpp"
#include "hemsflex/epso.hpp"
#include "hemsflex/errors.hpp"
#include "support.hpp"

using namespace hemsflex;

namespace {

Particle still_particle(const FlexTrajectory& x)
{
    Particle p;
    p.x = x;
    p.best = x;
    p.v_bat.assign(x.horizon(), 0.0);
    p.v_ewh.assign(x.horizon(), 0.0);
    p.weights = {Weights{0.7, 0.9, 1.1}, Weights{0.4, 0.6, 0.8}};
    return p;
}

EpsoConfig quick(int target, std::uint64_t seed = 3)
{
    EpsoConfig e;
    e.target_feasible = target;
    e.max_iters = 2000;
    e.seed = seed;
    return e;
}

}  // namespace

TEST_SUITE("epso")
{
    TEST_CASE("weight mutation")
    {
        Rng a = make_stream(1, stream_domain::test, 0);
        const Weights w{0.3, 1.2, 1.9};
        CHECK(mutate_weights(w, 0.0, a) == w);

        Rng r1 = make_stream(8, stream_domain::test, 0);
        Rng r2 = make_stream(8, stream_domain::test, 0);
        std::array<Weights, 2> x{w, w}, y{w, w};
        mutate_weights(x, 5.0, r1);
        mutate_weights(y, 5.0, r2);
        CHECK(x == y);
        for (const auto& d : x)
            for (double v : {d.inertia, d.memory, d.cooperation}) {
                CHECK(v >= kWeightMin);
                CHECK(v <= kWeightMax);
            }
    }

    TEST_CASE("unclamped weight mutation has the configured spread")
    {
        Rng rng = make_stream(12, stream_domain::test, 0);
        double sum = 0.0, sum2 = 0.0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            const double v = mutate_weight_unclamped(1.0, 5.0, rng);
            sum += v;
            sum2 += v * v;
        }
        const double mean = sum / n;
        const double sd = std::sqrt((sum2 - n * mean * mean) / (n - 1));
        CHECK(std::abs(sd - 5.0) < 0.25);
    }

    TEST_CASE("global best disturbance")
    {
        const FlexTrajectory g{{0.5, -0.2, 1.0}, {0.0, 0.5, 0.5}};
        Rng rng = make_stream(2, stream_domain::test, 0);
        CHECK(perturb_global_best(g, 0.0, rng) == g);

        const int n = 10000;
        FlexTrajectory sum = testing::zeros(3);
        for (int i = 0; i < n; ++i) {
            const auto d = perturb_global_best(g, 1.0, rng);
            for (std::size_t h = 0; h < 3; ++h) {
                sum.p_bat[h] += d.p_bat[h];
                sum.p_ewh[h] += d.p_ewh[h];
            }
        }
        for (std::size_t h = 0; h < 3; ++h) {
            CHECK(std::abs(sum.p_bat[h] / n - g.p_bat[h]) < 0.03);
            CHECK(std::abs(sum.p_ewh[h] / n - g.p_ewh[h]) < 0.03);
        }

        // every coordinate gets its own draw
        const auto d = perturb_global_best(g, 1.0, rng);
        std::set<double> offsets;
        for (std::size_t h = 0; h < 3; ++h) {
            offsets.insert(d.p_bat[h] - g.p_bat[h]);
            offsets.insert(d.p_ewh[h] - g.p_ewh[h]);
        }
        CHECK(offsets.size() == 6);
    }

    TEST_CASE("movement rule")
    {
        const auto cfg = synthetic::reference_config(3);
        Rng rng = make_stream(5, stream_domain::test, 0);

        const FlexTrajectory x{{0.2, -0.4, 1.0}, {0.5, 0.0, 0.5}};
        auto p = still_particle(x);
        move_particle(p, x, 0.15, cfg, rng);
        CHECK(p.x == x);

        auto q = still_particle(x);
        q.weights = {Weights{1.0, 0.0, 0.0}, Weights{1.0, 0.0, 0.0}};
        q.v_bat = {0.1, -0.3, 0.2};
        const FlexTrajectory far{{-1.5, 1.5, -1.5}, {0.0, 0.5, 0.0}};
        move_particle(q, far, 1.0, cfg, rng);
        CHECK(q.x.p_bat[0] == doctest::Approx(0.3));
        CHECK(q.x.p_bat[1] == doctest::Approx(-0.7));
        CHECK(q.x.p_bat[2] == doctest::Approx(1.2));
        CHECK(q.x.p_ewh == x.p_ewh);

        // EWH coordinate lands on 0.26 and snaps to the nominal power
        auto e = still_particle(FlexTrajectory{{0.0}, {0.0}});
        e.weights = {Weights{1.0, 0.0, 0.0}, Weights{1.0, 0.0, 0.0}};
        e.v_ewh = {0.26};
        move_particle(e, e.x, 0.0, synthetic::reference_config(1), rng);
        CHECK(e.x.p_ewh[0] == 0.5);
        CHECK(quantize_ewh(0.26, 0.5) == 0.5);
        CHECK(quantize_ewh(0.24, 0.5) == 0.0);
        CHECK(quantize_ewh(-3.0, 0.5) == 0.0);
        CHECK(quantize_ewh(7.0, 0.5) == 0.5);

        // battery coordinates are clamped to the power bounds
        auto c = still_particle(x);
        c.weights = {Weights{2.0, 2.0, 2.0}, Weights{2.0, 2.0, 2.0}};
        c.v_bat = {3.0, -3.0, 3.0};
        move_particle(c, far, 1.0, cfg, rng);
        for (double v : c.x.p_bat) {
            CHECK(v >= -1.5);
            CHECK(v <= 1.5);
        }
    }

    TEST_CASE("fitness counts fully compliant scenarios")
    {
        const auto cfg = synthetic::worked_example_config(3);
        ScenarioSet s{Eigen::MatrixXd(3, 3)};
        s.values << 0.2, 0.1, 0.3,   // no surplus
            0.5, 0.5, 0.5,            // no surplus
            0.2, -0.4, 0.3;           // surplus at step 2 only
        const FlexTrajectory t{{0.0, -0.1, 0.0}, {0.0, 0.0, 0.0}};
        CHECK(evaluate_fitness(t, s, cfg) == 2);
        CHECK(evaluate_fitness(testing::zeros(3), s, cfg) == 3);
        const FlexTrajectory bad{{0.0, -0.5, 0.0}, {0.0, 0.0, 0.0}};
        CHECK(evaluate_fitness(bad, s, cfg) == 0);

        const auto ctx = ScenarioContext::from(s);
        const auto score = evaluate_score(t, ctx, cfg);
        CHECK(score.fitness == 2);
        CHECK(score.penalty == 1.0);  // the one accommodation miss
    }

    TEST_CASE("robustness threshold")
    {
        CHECK(is_robust(90, 100, 0.9));
        CHECK_FALSE(is_robust(89, 100, 0.9));
        CHECK(is_robust(100, 100, 1.0));
        CHECK_FALSE(is_robust(99, 100, 1.0));
        CHECK(robust_threshold(100, 0.9) == 90);
        CHECK(robust_threshold(7, 0.5) == 4);
        for (int n : {1, 10, 37, 100})
            for (double tau : {0.1, 0.5, 0.9, 1.0}) CHECK(is_robust(n, n, tau));
    }

    TEST_CASE("score ordering")
    {
        CHECK(better({90, 5.0}, {89, 0.0}));
        CHECK(better({50, 1.0}, {50, 2.0}));
        CHECK_FALSE(better({50, 2.0}, {50, 2.0}));
    }

    TEST_CASE("global best is the member farthest from the mean")
    {
        FeasibleSet empty(4);
        CHECK_THROWS_AS((void)select_global_best(empty), InputError);

        FeasibleSet one(2);
        const FlexTrajectory a{{0.3, 0.1}, {0.5, 0.0}};
        one.insert(a, 100, 1e-6);
        CHECK(select_global_best(one) == a);
        CHECK(one.distance_to_mean(a) == 0.0);

        FeasibleSet pair(4);
        const FlexTrajectory lo = testing::zeros(4);
        const FlexTrajectory hi{std::vector<double>(4, 1.0), std::vector<double>(4, 1.0)};
        pair.insert(lo, 95, 1e-6);
        pair.insert(hi, 95, 1e-6);
        // mean is 0.5 everywhere: 4 steps x (0.5 + 0.5) for either member
        CHECK(pair.distance_to_mean(lo) == doctest::Approx(4.0));
        CHECK(pair.distance_to_mean(hi) == doctest::Approx(4.0));
        CHECK(select_global_best(pair) == lo);

        const FlexTrajectory mid{std::vector<double>(4, 0.5), std::vector<double>(4, 0.5)};
        const FlexTrajectory out{std::vector<double>(4, 1.5), std::vector<double>(4, 0.5)};
        FeasibleSet three(4);
        three.insert(mid, 90, 1e-6);
        three.insert(out, 90, 1e-6);
        three.insert(lo, 90, 1e-6);
        CHECK(select_global_best(three) == out);
    }

    TEST_CASE("feasible set drops near duplicates")
    {
        FeasibleSet s(2);
        const FlexTrajectory a{{0.1, 0.2}, {0.0, 0.5}};
        FlexTrajectory b = a;
        b.p_bat[0] += 5e-7;
        CHECK(s.insert(a, 95, 1e-6));
        CHECK_FALSE(s.insert(b, 96, 1e-6));
        b.p_bat[0] += 1e-6;
        CHECK(s.insert(b, 96, 1e-6));
        CHECK(s.size() == 2);
    }

    TEST_CASE("stochastic tournament")
    {
        Rng rng = make_stream(6, stream_domain::test, 0);
        const int n = 10000;
        int better_wins = 0, first_wins = 0, elite = 0;
        for (int i = 0; i < n; ++i) {
            better_wins += first_survives({100, 0.0}, {50, 0.0}, 0.8, rng);
            first_wins += first_survives({70, 1.0}, {70, 1.0}, 0.8, rng);
            elite += first_survives({50, 0.0}, {100, 0.0}, 1.0, rng);
        }
        CHECK(std::abs(better_wins / double(n) - 0.8) < 0.015);
        CHECK(std::abs(first_wins / double(n) - 0.5) < 0.02);
        CHECK(elite == 0);

        std::vector<Particle> parents(5), offspring(5);
        for (int i = 0; i < 5; ++i) {
            parents[i].score = {10, 0.0};
            offspring[i].score = {20, 0.0};
            offspring[i].x = FlexTrajectory{{double(i)}, {0.0}};
        }
        const auto next = stochastic_tournament(parents, offspring, 1.0, rng);
        REQUIRE(next.size() == 5);
        for (int i = 0; i < 5; ++i) CHECK(next[i].x.p_bat[0] == double(i));
    }

    TEST_CASE("initial population")
    {
        const auto inst = testing::window_instance(32, 24, 5);
        const auto ref = inst.scenarios.row(0);
        EpsoConfig e;
        const auto pop = seed_initial_population(ref, e, inst.cfg);
        REQUIRE(pop.size() == 30);
        const auto surplus = pv_surplus(ref);
        int surplus_steps = 0;
        for (double s : surplus) surplus_steps += s > 0.0;
        REQUIRE(surplus_steps > 0);

        for (std::size_t i = 0; i < pop.size(); ++i) {
            const auto& p = pop[i];
            for (std::size_t h = 0; h < 24; ++h) {
                CHECK(p.x.p_bat[h] >= -1.5);
                CHECK(p.x.p_bat[h] <= 1.5);
                CHECK((p.x.p_ewh[h] == 0.0 || p.x.p_ewh[h] == 0.5));
                if (i < 15 && surplus[h] > 0.0) CHECK(p.x.p_bat[h] == 0.0);
            }
        }
        int nonzero_on_surplus = 0;
        for (std::size_t i = 15; i < 30; ++i)
            for (std::size_t h = 0; h < 24; ++h) nonzero_on_surplus += surplus[h] > 0.0 && pop[i].x.p_bat[h] != 0.0;
        CHECK(nonzero_on_surplus > 0);

        const auto again = seed_initial_population(ref, e, inst.cfg);
        for (std::size_t i = 0; i < pop.size(); ++i) {
            CHECK(again[i].x == pop[i].x);
            CHECK(again[i].weights == pop[i].weights);
        }
    }

    TEST_CASE("mutation rate decays linearly")
    {
        EpsoConfig e;
        e.max_iters = 11;
        CHECK(e.mutation_rate(0) == doctest::Approx(0.5));
        CHECK(e.mutation_rate(5) == doctest::Approx(0.275));
        CHECK(e.mutation_rate(10) == doctest::Approx(0.05));
        CHECK(e.mutation_rate(50) == doctest::Approx(0.05));
    }

    TEST_CASE("easy instance finishes almost immediately")
    {
        auto cfg = synthetic::reference_config(12);
        cfg.battery.capacity = 1000.0;
        cfg.battery.soc_init = 500.0;
        cfg.ewh.draw_profile.assign(12, 0.0);
        ScenarioSet s{Eigen::MatrixXd::Constant(10, 12, 0.8)};
        const auto r = run_search(quick(1), s, cfg);
        CHECK(r.target_reached);
        CHECK(r.feasible.size() >= 1);
        CHECK(r.iterations <= 2);
        CHECK_FALSE(r.warning.has_value());
    }

    TEST_CASE("impossible instance returns nothing with a warning")
    {
        // The tank starts at its minimum and the first draw removes more heat
        // than the element can add in one step.
        auto cfg = synthetic::reference_config(6);
        cfg.ewh.theta_init = cfg.ewh.theta_min;
        cfg.ewh.draw_profile = {50.0, 0.0, 0.0, 0.0, 0.0, 0.0};
        REQUIRE(ewh_step(cfg.ewh.theta_init, cfg.ewh.p_nom, 50.0, cfg.dt, cfg.ewh) < cfg.ewh.theta_min);
        ScenarioSet s{Eigen::MatrixXd::Constant(10, 6, 0.8)};
        auto e = quick(5);
        e.max_iters = 50;
        const auto r = run_search(e, s, cfg);
        CHECK(r.feasible.empty());
        CHECK_FALSE(r.target_reached);
        REQUIRE(r.warning.has_value());
        CHECK(r.iterations == 50);
    }

    TEST_CASE("search output is sound, bounded, reproducible and thread-independent")
    {
        const auto inst = testing::window_instance(36, 16, 100);
        const auto e = quick(150);
        const auto r = run_search(e, inst.scenarios, inst.cfg);
        REQUIRE(r.target_reached);
        const int threshold = robust_threshold(100, e.tau_scen);
        const auto& members = r.feasible.trajectories();
        for (std::size_t i = 0; i < members.size(); ++i) {
            const auto& t = members[i];
            const int oracle = oracle_check(t, inst.scenarios, inst.cfg);
            CHECK(oracle >= threshold);
            CHECK(oracle == r.feasible.fitness()[i]);
            CHECK(oracle <= 100);
            for (std::size_t h = 0; h < 16; ++h) {
                CHECK((t.p_ewh[h] == 0.0 || t.p_ewh[h] == 0.5));
                CHECK(t.p_bat[h] >= -1.5);
                CHECK(t.p_bat[h] <= 1.5);
            }
        }
        CHECK(r.log.size() == static_cast<std::size_t>(r.iterations));
        CHECK(r.log.back().feasible == members.size());

        const auto again = run_search(e, inst.scenarios, inst.cfg);
        CHECK(again.feasible.trajectories() == members);
        auto threaded = e;
        threaded.threads = 4;
        CHECK(run_search(threaded, inst.scenarios, inst.cfg).feasible.trajectories() == members);
    }

    TEST_CASE("stricter robustness never admits more candidates")
    {
        const auto inst = testing::window_instance(36, 16, 50);
        Rng rng = make_stream(17, stream_domain::test, 0);
        std::vector<int> fitness;
        for (int i = 0; i < 300; ++i)
            fitness.push_back(evaluate_fitness(testing::random_trajectory(16, inst.cfg, rng, 0.25, 0.2), inst.scenarios,
                                               inst.cfg));
        std::size_t prev = fitness.size() + 1;
        for (double tau : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
            std::size_t admitted = 0;
            for (int f : fitness) admitted += is_robust(f, 50, tau);
            CHECK(admitted <= prev);
            prev = admitted;
        }
    }

    TEST_CASE("invalid settings are rejected")
    {
        EpsoConfig e;
        e.tau_scen = 0.0;
        CHECK_THROWS_AS(e.validate(), ParameterError);
        e = {};
        e.mutation_min = 0.6;
        CHECK_THROWS_AS(e.validate(), ParameterError);
    }
}
