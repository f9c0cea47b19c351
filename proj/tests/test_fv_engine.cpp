#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "fvlab/complete_graph.hpp"
#include "fvlab/coupling.hpp"
#include "fvlab/fv_model.hpp"
#include "fvlab/monte_carlo.hpp"
#include "fvlab/simulate.hpp"
#include "fvlab/two_point.hpp"
#include "support/stats.hpp"

using namespace fvlab;

TEST_CASE("configuration enumeration, counting and ranking") {
    CHECK(configuration_count(2, 2) == 3);
    CHECK(configuration_count(5, 2) == 6);
    CHECK(configuration_count(13, 3) == 105);

    const auto states = enumerate_configurations(3, 4);
    REQUIRE(states.size() == 15);
    CHECK(states.front().counts == std::vector<int>{0, 0, 4});
    CHECK(states.back().counts == std::vector<int>{4, 0, 0});
    for (std::size_t s = 0; s < states.size(); ++s)
        CHECK(configuration_rank(states[s]) == s);

    CHECK_THROWS_AS(enumerate_configurations(6, 100), std::runtime_error);
    CHECK(config_distance(Configuration{{4, 0, 0}}, Configuration{{2, 1, 1}}) == 2.0);
}

TEST_CASE("per-move rate of the uniform three-site model") {
    // From (1,1,0) the move 1 -> 2 combines the mutation rate 1/3 with the
    // interaction pull 1 * 1/(N-1) = 1.
    const FvModel m = complete_graph_fv(CompleteGraphParams{3, 1.0, 2});
    const Configuration eta{{1, 1, 0}};
    CHECK_THAT(move_rate(m, eta, 0, 1), Catch::Matchers::WithinAbs(4.0 / 3.0, 1e-15));
    CHECK(move_rate(m, eta, 2, 0) == 0.0);
}

TEST_CASE("configuration-level generator has conservative rows") {
    const FvModel m = complete_graph_fv(CompleteGraphParams{3, 0.5, 3});
    const Matrix gen = fv_generator_matrix(m);
    for (std::size_t i = 0; i < gen.rows(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < gen.cols(); ++j) {
            if (i != j) CHECK(gen(i, j) >= 0.0);
            sum += gen(i, j);
        }
        CHECK_THAT(sum, Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
}

TEST_CASE("event-driven simulation is deterministic and conserves mass") {
    const FvModel m = complete_graph_fv(CompleteGraphParams{3, 1.0, 8});
    const Configuration eta0{{8, 0, 0}};
    CounterRng r1 = CounterRng::for_replica(42, 0);
    CounterRng r2 = CounterRng::for_replica(42, 0);
    const Trajectory a = simulate(m, eta0, 2.0, r1);
    const Trajectory b = simulate(m, eta0, 2.0, r2);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
        CHECK(a.events[i].time == b.events[i].time);
        CHECK(a.events[i].from == b.events[i].from);
        CHECK(a.events[i].to == b.events[i].to);
        CHECK(a.events[i].cause == b.events[i].cause);
    }

    std::vector<int> counts = eta0.counts;
    double prev = 0.0;
    for (const TrajectoryEvent& ev : a.events) {
        CHECK(ev.time >= prev);
        prev = ev.time;
        counts[ev.from] -= 1;
        counts[ev.to] += 1;
        CHECK(std::accumulate(counts.begin(), counts.end(), 0) == 8);
        for (int c : counts) CHECK(c >= 0);
    }
    CHECK(counts == a.final_config.counts);
}

TEST_CASE("simulation matches the matrix exponential law") {
    const CompleteGraphParams cg{2, 1.0, 4};
    const FvModel m = complete_graph_fv(cg);
    const Configuration eta0{{4, 0}};
    const double t = 0.7;

    Matrix gen = fv_generator_matrix(m);
    gen *= t;
    const Matrix pt = matrix_exponential(std::move(gen));
    const std::size_t row = configuration_rank(eta0);

    const std::size_t replicas = 20000;
    std::vector<double> counts(5, 0.0);
    detail::run_replicas(replicas, 7, 0, [&](std::size_t, CounterRng& rng) {
        const Trajectory tr = simulate(m, eta0, t, rng, false);
        counts[configuration_rank(tr.final_config)] += 1.0;
    });
    for (std::size_t s = 0; s < counts.size(); ++s) {
        const double p = pt(row, s);
        const double se = std::sqrt(p * (1.0 - p) / replicas);
        CHECK(std::abs(counts[s] / replicas - p) <= 5.0 * se + 1.0 / replicas);
    }
}

TEST_CASE("coupled two-site marginals follow the exact law") {
    const TwoPointParams tp{1.0, 1.5, 0.5, 1.0, 6};
    const FvModel m = two_point_fv(tp);
    const Configuration ea{{6, 0}};
    const Configuration eb{{2, 4}};
    const double t = 0.8;

    Matrix gen = birth_death_generator(birth_death_reduction(tp));
    gen *= t;
    const Matrix pt = matrix_exponential(std::move(gen));

    const std::size_t replicas = 20000;
    std::vector<double> hist_a(7, 0.0), hist_b(7, 0.0);
    detail::run_replicas(replicas, 11, 0, [&](std::size_t, CounterRng& rng) {
        const CoupledTrajectory ct = simulate_coupled(m, ea, eb, t, rng, {t});
        hist_a[ct.checkpoints[0].first.counts[0]] += 1.0;
        hist_b[ct.checkpoints[0].second.counts[0]] += 1.0;
    });

    auto chi_square_ok = [&](const std::vector<double>& hist, int n0) {
        // Merge adjacent states until each bin expects at least 10 counts;
        // a light tail is folded into the final bin.
        std::vector<double> exp_bins, obs_bins;
        double e = 0.0, o = 0.0;
        for (int s = 0; s <= 6; ++s) {
            e += pt(n0, s) * replicas;
            o += hist[s];
            if (e >= 10.0) {
                exp_bins.push_back(e);
                obs_bins.push_back(o);
                e = o = 0.0;
            }
        }
        REQUIRE(exp_bins.size() >= 2);
        exp_bins.back() += e;
        obs_bins.back() += o;
        double chi = 0.0;
        for (std::size_t i = 0; i < exp_bins.size(); ++i)
            chi += (obs_bins[i] - exp_bins[i]) * (obs_bins[i] - exp_bins[i]) / exp_bins[i];
        return chi <= fvlab_test::chi2_quantile(static_cast<double>(exp_bins.size()) - 1.0, 0.99);
    };
    CHECK(chi_square_ok(hist_a, 6));
    CHECK(chi_square_ok(hist_b, 2));
}

TEST_CASE("coupled copies of the complete graph keep exact marginal means") {
    const CompleteGraphParams cg{3, 1.0, 10};
    const FvModel m = complete_graph_fv(cg);
    const Configuration ea{{10, 0, 0}};
    const Configuration eb{{4, 3, 3}};
    const double t = 1.2;

    const McVectorResult mc = mc_estimate_vector(
        [&](std::size_t, CounterRng& rng) {
            const CoupledTrajectory ct = simulate_coupled(m, ea, eb, t, rng, {t});
            return std::vector<double>{
                static_cast<double>(ct.checkpoints[0].first.counts[0]),
                static_cast<double>(ct.checkpoints[0].second.counts[0]),
                config_distance(ct.checkpoints[0].first, ct.checkpoints[0].second)};
        },
        3, 5000, 3);

    CHECK(std::abs(mc.mean[0] - mean_dynamics(cg, 10.0, t)) <= 4.0 * mc.stderr_[0]);
    CHECK(std::abs(mc.mean[1] - mean_dynamics(cg, 4.0, t)) <= 4.0 * mc.stderr_[1]);
    const double d0 = config_distance(ea, eb);
    CHECK(mc.mean[2] <= d0 * std::exp(-t) * (1.0 + 3.0 * mc.stderr_[2] / mc.mean[2]));
}

TEST_CASE("coupling rejects unsupported inputs") {
    const FvModel m = complete_graph_fv(CompleteGraphParams{3, 1.0, 4});
    CounterRng rng = CounterRng::for_replica(1, 0);
    CHECK_THROWS_AS(simulate_coupled(m, Configuration{{4, 0, 0}}, Configuration{{0, 4, 0}}, 1.0,
                                     rng, {0.8, 0.2}),
                    std::invalid_argument);

    Matrix jumps(3, 3);  // non-constant rates on three sites: no coupling route
    jumps(0, 1) = 1.0;
    jumps(1, 0) = 2.0;
    jumps(1, 2) = 1.0;
    jumps(2, 1) = 1.0;
    jumps(0, 2) = 0.5;
    jumps(2, 0) = 0.5;
    const FvModel bad = make_fv_model(build_rate_matrix(jumps, {1.0, 1.0, 1.0}), 4);
    CHECK_THROWS_AS(simulate_coupled(bad, Configuration{{4, 0, 0}}, Configuration{{0, 4, 0}}, 1.0,
                                     rng),
                    std::runtime_error);
}

TEST_CASE("replica estimates are independent of the worker count") {
    auto observable = [](std::size_t, CounterRng& rng) {
        double acc = 0.0;
        for (int i = 0; i < 10; ++i) acc += rng.uniform01();
        return acc;
    };
    const McResult seq = mc_estimate(observable, 500, 99, 1);
    const McResult par = mc_estimate(observable, 500, 99, 4);
    CHECK(seq.mean == par.mean);
    CHECK(seq.stderr_ == par.stderr_);
    CHECK_THROWS_AS(mc_estimate(observable, 1, 99), std::invalid_argument);
}

TEST_CASE("empirical measure of a configuration") {
    const FiniteDistribution em = empirical_measure(Configuration{{3, 1, 0}});
    CHECK(em.weights == std::vector<double>{0.75, 0.25, 0.0});
}
