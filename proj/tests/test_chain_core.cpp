#include <catch_amalgamated.hpp>

#include <cmath>

#include "fvlab/chain.hpp"
#include "fvlab/distribution.hpp"
#include "fvlab/linalg.hpp"
#include "fvlab/rng.hpp"

using namespace fvlab;

namespace {

RateMatrix two_site_example() {
    Matrix jumps(2, 2);
    jumps(0, 1) = 1.0;
    jumps(1, 0) = 2.0;
    return build_rate_matrix(jumps, {0.0, 3.0});
}

}  // namespace

TEST_CASE("rate matrix assembly pins the documented two-site example") {
    const RateMatrix q = two_site_example();
    REQUIRE(q.size == 2);
    // Full matrix rows for the transient states (absorbing row is zero).
    CHECK(q.generator(0, 0) == 0.0);
    CHECK(q.generator(1, 0) == 0.0);
    CHECK(q.generator(1, 1) == -1.0);
    CHECK(q.generator(1, 2) == 1.0);
    CHECK(q.generator(2, 0) == 3.0);
    CHECK(q.generator(2, 1) == 2.0);
    CHECK(q.generator(2, 2) == -5.0);
    const Matrix m = q.killed();
    CHECK(m(0, 0) == -1.0);
    CHECK(m(1, 1) == -5.0);
}

TEST_CASE("rate matrix rejects negative inputs") {
    Matrix jumps(2, 2);
    jumps(0, 1) = -0.5;
    CHECK_THROWS_AS(build_rate_matrix(jumps, {0.0, 0.0}), std::invalid_argument);
    Matrix ok(2, 2);
    CHECK_THROWS_AS(build_rate_matrix(ok, {0.0, -1.0}), std::invalid_argument);
}

TEST_CASE("semigroup of a one-way two-state chain hits 1/2 at t = ln 2") {
    Matrix jumps(2, 2);
    jumps(0, 1) = 1.0;
    const RateMatrix q = build_rate_matrix(jumps, {0.0, 0.0});
    const SemigroupSnapshot snap = semigroup(q, std::log(2.0));
    CHECK_THAT(snap.kernel(1, 2), Catch::Matchers::WithinAbs(0.5, 1e-14));
    CHECK_THAT(snap.kernel(1, 1), Catch::Matchers::WithinAbs(0.5, 1e-14));
    CHECK_THROWS_AS(semigroup(q, -0.1), std::domain_error);
}

TEST_CASE("semigroup satisfies the Chapman-Kolmogorov equation") {
    Matrix jumps(3, 3);
    jumps(0, 1) = 0.7;
    jumps(0, 2) = 0.2;
    jumps(1, 0) = 1.3;
    jumps(1, 2) = 0.4;
    jumps(2, 0) = 0.5;
    jumps(2, 1) = 2.0;
    const RateMatrix q = build_rate_matrix(jumps, {0.3, 0.0, 1.1});
    const Matrix pt = semigroup(q, 0.6).kernel;
    const Matrix ps = semigroup(q, 0.9).kernel;
    const Matrix pts = semigroup(q, 1.5).kernel;
    const Matrix prod = matmul(pt, ps);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK_THAT(prod(i, j), Catch::Matchers::WithinAbs(pts(i, j), 1e-12));
}

TEST_CASE("conditioned law renormalizes the surviving mass") {
    const RateMatrix q = two_site_example();
    const FiniteDistribution mu{{0.25, 0.75}};
    const FiniteDistribution nu = conditioned_law(q, mu, 0.8);
    double sum = 0.0;
    for (double w : nu.weights) sum += w;
    CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));

    // Manual renormalization against the full semigroup.
    const Matrix pt = semigroup(q, 0.8).kernel;
    double raw1 = 0.25 * pt(1, 1) + 0.75 * pt(2, 1);
    double raw2 = 0.25 * pt(1, 2) + 0.75 * pt(2, 2);
    CHECK_THAT(nu.weights[0], Catch::Matchers::WithinAbs(raw1 / (raw1 + raw2), 1e-12));
}

TEST_CASE("stationary distribution of a symmetric cycle is uniform") {
    Matrix gen(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) gen(i, j) = (i == j) ? -2.0 : 1.0;
    const FiniteDistribution pi = stationary_distribution(gen);
    for (double w : pi.weights) CHECK_THAT(w, Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
}

TEST_CASE("stationary distribution rejects reducible generators") {
    Matrix gen(2, 2);  // two isolated states
    CHECK_THROWS_AS(stationary_distribution(gen), std::runtime_error);
}

TEST_CASE("principal eigenpair of the benchmark killed chain") {
    Matrix jumps(2, 2);
    jumps(0, 1) = 1.0;
    jumps(1, 0) = 1.0;
    const RateMatrix q = build_rate_matrix(jumps, {0.0, 1.0});
    const QsdResult r = qsd_principal(q);
    const double expected = 0.5 * (-3.0 + std::sqrt(5.0));
    CHECK_THAT(r.lambda_plus, Catch::Matchers::WithinAbs(expected, 1e-10));

    // Left eigenvector fixed point: nu M = lambda nu after normalization.
    const Matrix m = q.killed();
    for (int j = 0; j < 2; ++j) {
        const double image = r.law.weights[0] * m(0, j) + r.law.weights[1] * m(1, j);
        CHECK_THAT(image, Catch::Matchers::WithinAbs(r.lambda_plus * r.law.weights[j], 1e-9));
    }
}

TEST_CASE("matrix exponential agrees with closed forms") {
    Matrix nil(2, 2);
    nil(0, 1) = 1.0;
    const Matrix en = matrix_exponential(nil);
    CHECK(en(0, 0) == 1.0);
    CHECK_THAT(en(0, 1), Catch::Matchers::WithinAbs(1.0, 1e-15));

    Matrix rot(2, 2);
    rot(0, 1) = -1.0;
    rot(1, 0) = 1.0;
    const Matrix er = matrix_exponential(rot);
    CHECK_THAT(er(0, 0), Catch::Matchers::WithinAbs(std::cos(1.0), 1e-14));
    CHECK_THAT(er(1, 0), Catch::Matchers::WithinAbs(std::sin(1.0), 1e-14));
}

TEST_CASE("linear solver inverts a generic system") {
    Matrix a(4, 4);
    const double entries[4][4] = {{4, 1, 0, 2}, {1, 5, 1, 0}, {0, 2, 6, 1}, {1, 0, 1, 3}};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = entries[i][j];
    const std::vector<double> b = {1.0, -2.0, 0.5, 3.0};
    const std::vector<double> x = solve_linear(a, b);
    for (int i = 0; i < 4; ++i) {
        double acc = 0.0;
        for (int j = 0; j < 4; ++j) acc += entries[i][j] * x[j];
        CHECK_THAT(acc, Catch::Matchers::WithinAbs(b[i], 1e-12));
    }

    Matrix singular(2, 2);
    singular(0, 0) = singular(0, 1) = singular(1, 0) = singular(1, 1) = 1.0;
    CHECK_THROWS_AS(solve_linear(singular, {1.0, 1.0}), std::runtime_error);
}

TEST_CASE("distribution helpers") {
    CHECK_THROWS_AS(validate_distribution(FiniteDistribution{{0.5, -0.1, 0.6}}),
                    std::runtime_error);
    CHECK_THROWS_AS(validate_distribution(FiniteDistribution{{0.5, 0.1}}), std::runtime_error);
    const FiniteDistribution d = normalized({2.0, 6.0});
    CHECK(d.weights[0] == 0.25);
    const FiniteDistribution u{{0.5, 0.5}};
    CHECK_THAT(tv_distance(d, u), Catch::Matchers::WithinAbs(0.25, 1e-15));
    CHECK_THAT(l1_distance(d, u), Catch::Matchers::WithinAbs(0.5, 1e-15));
}

TEST_CASE("counter rng streams are reproducible and replica-independent") {
    CounterRng a = CounterRng::for_replica(0xF1E71, 7);
    CounterRng b = CounterRng::for_replica(0xF1E71, 7);
    CounterRng c = CounterRng::for_replica(0xF1E71, 8);
    bool differs = false;
    for (int i = 0; i < 64; ++i) {
        const std::uint64_t va = a.next_u64();
        REQUIRE(va == b.next_u64());
        if (va != c.next_u64()) differs = true;
    }
    CHECK(differs);

    CounterRng u = CounterRng::for_replica(1, 1);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform01();
        REQUIRE(x > 0.0);
        REQUIRE(x < 1.0);
    }
    const std::vector<double> w = {0.0, 2.0, 0.0};
    CHECK(u.categorical(w, 3, 2.0) == 1);
    CHECK_THROWS_AS(u.exponential(0.0), std::invalid_argument);
}
