#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "fvlab/distribution.hpp"
#include "fvlab/linalg.hpp"

namespace fvlab {

// Continuous-time chain on F = {0, 1, ..., size} where state 0 is absorbing.
// `generator` is the full (size+1) x (size+1) matrix including the zero row
// for state 0; `absorption` duplicates column 0 for convenient access.
struct RateMatrix {
    std::size_t size = 0;
    Matrix generator;
    std::vector<double> absorption;

    // The killed generator M: restriction of the full matrix to F*, rows of
    // which sum to minus the absorption rate.
    Matrix killed() const {
        Matrix m(size, size);
        for (std::size_t i = 0; i < size; ++i)
            for (std::size_t j = 0; j < size; ++j) m(i, j) = generator(i + 1, j + 1);
        return m;
    }
};

// Assembles the full generator from jump rates among the transient states
// (diagonal of `off_diag` is ignored) and per-state absorption rates.
inline RateMatrix build_rate_matrix(const Matrix& off_diag, const std::vector<double>& absorption) {
    const std::size_t n = off_diag.rows();
    if (off_diag.cols() != n) throw std::invalid_argument("build_rate_matrix: square table required");
    if (absorption.size() != n)
        throw std::invalid_argument("build_rate_matrix: absorption length mismatch");
    RateMatrix q;
    q.size = n;
    q.absorption = absorption;
    q.generator = Matrix(n + 1, n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (absorption[i] < 0.0) throw std::invalid_argument("build_rate_matrix: negative rate");
        double out = absorption[i];
        q.generator(i + 1, 0) = absorption[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double r = off_diag(i, j);
            if (r < 0.0) throw std::invalid_argument("build_rate_matrix: negative rate");
            q.generator(i + 1, j + 1) = r;
            out += r;
        }
        q.generator(i + 1, i + 1) = -out;
    }
    return q;
}

struct SemigroupSnapshot {
    double t = 0.0;
    Matrix kernel;  // P_t on the full space F, rows sum to 1
};

inline SemigroupSnapshot semigroup(const RateMatrix& q, double t) {
    if (t < 0.0) throw std::domain_error("semigroup: negative time");
    Matrix a = q.generator;
    a *= t;
    return SemigroupSnapshot{t, matrix_exponential(std::move(a))};
}

// Law of X_t conditioned on non-absorption, started from mu on F*.
inline FiniteDistribution conditioned_law(const RateMatrix& q, const FiniteDistribution& mu,
                                          double t) {
    if (mu.size() != q.size) throw std::invalid_argument("conditioned_law: support mismatch");
    const Matrix& p = semigroup(q, t).kernel;
    std::vector<double> numer(q.size, 0.0);
    double survival = 0.0;
    for (std::size_t y = 0; y < q.size; ++y) {
        const double w = mu.weights[y];
        if (w == 0.0) continue;
        for (std::size_t k = 0; k < q.size; ++k) numer[k] += w * p(y + 1, k + 1);
        survival += w * (1.0 - p(y + 1, 0));
    }
    if (!(survival > 0.0)) throw std::runtime_error("conditioned_law: fully absorbed");
    for (double& v : numer) v /= survival;
    return FiniteDistribution{std::move(numer)};
}

// Unique probability vector with nu L = 0 for a conservative irreducible
// generator L. One balance equation is replaced by the normalization row;
// a singular pivot (rank deficiency beyond the single null direction)
// signals a reducible chain.
inline FiniteDistribution stationary_distribution(const Matrix& l, double residual_tol = 1e-11) {
    const std::size_t n = l.rows();
    if (l.cols() != n) throw std::invalid_argument("stationary_distribution: square matrix required");
    const double scale = std::max(1.0, inf_norm(l));
    Matrix a(n, n);
    std::vector<double> rhs(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) a(j, i) = l(i, j);
    for (std::size_t i = 0; i < n; ++i) a(0, i) = 1.0;
    rhs[0] = 1.0;
    std::vector<double> nu;
    try {
        nu = solve_linear(std::move(a), rhs, 1e-12 * scale);
    } catch (const std::runtime_error&) {
        throw std::runtime_error("stationary_distribution: reducible generator");
    }
    double total = 0.0;
    for (double& v : nu) {
        if (v < 0.0) {
            if (v < -1e-9) throw std::runtime_error("stationary_distribution: negative weight");
            v = 0.0;
        }
        total += v;
    }
    for (double& v : nu) v /= total;
    for (std::size_t j = 0; j < n; ++j) {
        double r = 0.0;
        for (std::size_t i = 0; i < n; ++i) r += nu[i] * l(i, j);
        if (std::abs(r) > residual_tol * scale)
            throw std::runtime_error("stationary_distribution: residual " + std::to_string(r));
    }
    return FiniteDistribution{std::move(nu)};
}

struct QsdResult {
    FiniteDistribution law;     // left principal eigenvector of the killed generator
    double lambda_plus = 0.0;   // its eigenvalue (0 when there is no absorption)
};

// Power iteration on M + cI with c = max |diagonal| + 1, which is entrywise
// non-negative with the QSD as Perron vector. Deterministic uniform start.
inline QsdResult qsd_principal(const RateMatrix& q, double residual_tol = 1e-10,
                               std::size_t max_iter = 500000) {
    const std::size_t n = q.size;
    if (n == 0) throw std::invalid_argument("qsd_principal: empty chain");
    const Matrix m = q.killed();
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c = std::max(c, std::abs(m(i, i)));
    c += 1.0;
    const double scale = std::max(1.0, inf_norm(m));

    std::vector<double> nu(n, 1.0 / static_cast<double>(n));
    std::vector<double> num(n);
    double lambda = 0.0;
    double residual = 0.0;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        lambda = 0.0;
        residual = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += nu[i] * m(i, j);
            num[j] = s;
            lambda += s;
        }
        for (std::size_t j = 0; j < n; ++j)
            residual = std::max(residual, std::abs(num[j] - lambda * nu[j]));
        if (residual <= residual_tol * scale) return QsdResult{FiniteDistribution{nu}, lambda};
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            num[j] += c * nu[j];
            total += num[j];
        }
        for (std::size_t j = 0; j < n; ++j) nu[j] = num[j] / total;
    }
    throw std::runtime_error("qsd_principal: no convergence, residual " + std::to_string(residual));
}

}  // namespace fvlab
