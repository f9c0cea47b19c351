#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fvlab/birth_death.hpp"
#include "fvlab/chain.hpp"
#include "fvlab/distribution.hpp"
#include "fvlab/fv_model.hpp"
#include "fvlab/monte_carlo.hpp"
#include "fvlab/spectral.hpp"

namespace fvlab {

// Two transient sites: jump_12/jump_21 are the a/b jump rates between them,
// kill_1/kill_2 the per-site absorption rates, particles the FV copy count.
struct TwoPointParams {
    double jump_12 = 1.0;  // a
    double jump_21 = 1.0;  // b
    double kill_1 = 0.0;   // p0(1)
    double kill_2 = 0.0;   // p0(2)
    int particles = 2;     // N
};

inline void validate_params(const TwoPointParams& tp) {
    if (!(tp.jump_12 > 0.0) || !(tp.jump_21 > 0.0))
        throw std::invalid_argument("two_point: jump rates must be positive");
    if (tp.kill_1 < 0.0 || tp.kill_2 < 0.0)
        throw std::invalid_argument("two_point: negative kill rate");
    if (!(tp.kill_1 + tp.kill_2 > 0.0))
        throw std::invalid_argument("two_point: at least one kill rate must be positive");
    if (tp.particles < 2) throw std::invalid_argument("two_point: at least two particles");
}

inline RateMatrix two_point_chain(const TwoPointParams& tp) {
    validate_params(tp);
    Matrix off(2, 2);
    off(0, 1) = tp.jump_12;
    off(1, 0) = tp.jump_21;
    return build_rate_matrix(off, {tp.kill_1, tp.kill_2});
}

inline FvModel two_point_fv(const TwoPointParams& tp) {
    return make_fv_model(two_point_chain(tp), tp.particles);
}

struct KilledEigensystem {
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    std::array<double, 2> v_plus{};   // right eigenvectors
    std::array<double, 2> v_minus{};
    FiniteDistribution qsd;           // normalized left principal eigenvector
};

inline KilledEigensystem killed_eigensystem(const TwoPointParams& tp) {
    validate_params(tp);
    const double a = tp.jump_12, b = tp.jump_21;
    const double dk = tp.kill_1 - tp.kill_2;
    const double am = a - b + dk;
    const double root = std::sqrt(am * am + 4.0 * a * b);
    const double trace = a + b + tp.kill_1 + tp.kill_2;
    KilledEigensystem out;
    out.lambda_plus = 0.5 * (-trace + root);
    out.lambda_minus = 0.5 * (-trace - root);
    out.v_plus = {a, 0.5 * (am + root)};
    out.v_minus = {a, 0.5 * (am - root)};
    const double u2 = 0.5 * (am + root);
    out.qsd = normalized({b, u2});
    return out;
}

// lambda_plus - lambda_minus in the closed form of the trace/determinant
// algebra; the two expressions agree to roundoff.
inline double conditioned_gap(const TwoPointParams& tp) {
    const double ab = tp.jump_12 + tp.jump_21;
    const double dk = tp.kill_1 - tp.kill_2;
    return std::sqrt(ab * ab + 2.0 * (tp.jump_12 - tp.jump_21) * dk + dk * dk);
}

struct ConvergenceRates {
    double conditioned = 0.0;  // lambda_plus - lambda_minus
    double rho = 0.0;          // a + b - (sup p0 - inf p0)
};

inline ConvergenceRates conditioned_convergence_rate(const TwoPointParams& tp) {
    validate_params(tp);
    ConvergenceRates out;
    const KilledEigensystem eig = killed_eigensystem(tp);
    out.conditioned = eig.lambda_plus - eig.lambda_minus;
    out.rho = tp.jump_12 + tp.jump_21 - std::abs(tp.kill_1 - tp.kill_2);
    if (tp.kill_1 != tp.kill_2 && !(out.conditioned > out.rho))
        throw std::logic_error("conditioned_convergence_rate: rate ordering violated");
    return out;
}

// Occupation of site 1 is a birth-death chain; the rate expressions are kept
// in exactly the shape used by the dense FV generator so the two paths agree
// bitwise.
inline BirthDeathSpec birth_death_reduction(const TwoPointParams& tp) {
    validate_params(tp);
    const int n_p = tp.particles;
    const double n1 = n_p - 1;
    BirthDeathSpec s;
    s.birth.resize(n_p + 1);
    s.death.resize(n_p + 1);
    for (int n = 0; n <= n_p; ++n) {
        s.birth[n] = (n_p - n) * (tp.jump_21 + tp.kill_2 * n / n1);
        s.death[n] = n * (tp.jump_12 + tp.kill_1 * (n_p - n) / n1);
    }
    return s;
}

inline FiniteDistribution invariant_pi(const TwoPointParams& tp) {
    return birth_death_stationary(birth_death_reduction(tp));
}

// The explicit binomial display of pi, evaluated in log space and normalized
// by summation; cross-checked against the product form in tests.
inline FiniteDistribution pi_binomial_form(const TwoPointParams& tp) {
    validate_params(tp);
    const int n_p = tp.particles;
    const double a = tp.jump_12, b = tp.jump_21;
    const double n1 = n_p - 1.0;
    std::vector<double> logw(n_p + 1, 0.0);
    for (int n = 1; n <= n_p; ++n) {
        logw[n] = logw[n - 1] + std::log(b * n1 + (n - 1) * tp.kill_2) -
                  std::log(a * n1 + (n_p - n) * tp.kill_1) +
                  std::log(static_cast<double>(n_p - n + 1)) - std::log(static_cast<double>(n));
    }
    double peak = logw[0];
    for (double v : logw) peak = std::max(peak, v);
    std::vector<double> w(n_p + 1);
    double total = 0.0;
    for (int n = 0; n <= n_p; ++n) {
        w[n] = std::exp(logw[n] - peak);
        total += w[n];
    }
    for (double& v : w) v /= total;
    return FiniteDistribution{std::move(w)};
}

struct CouplingRow {
    int dn = 0;    // increment of the lower copy
    int dnn = 0;   // increment of the upper copy
    double rate = 0.0;
    bool interaction = false;
};

// The ten off-diagonal transitions of the coupled generator for an ordered
// pair n < n'; the four synchronous rows come first, then the six
// discrepancy rows.
inline std::vector<CouplingRow> coupling_generator_rows(const TwoPointParams& tp, int n, int nn) {
    validate_params(tp);
    const int n_p = tp.particles;
    if (!(0 <= n && n < nn && nn <= n_p))
        throw std::invalid_argument("coupling_generator_rows: need 0 <= n < n' <= N");
    const double a = tp.jump_12, b = tp.jump_21;
    const double p1 = tp.kill_1, p2 = tp.kill_2;
    const double n1 = n_p - 1.0;
    const double gap = nn - n;
    return {
        {-1, -1, n * a, false},
        {+1, +1, (n_p - nn) * b, false},
        {+1, 0, gap * b, false},
        {0, -1, gap * a, false},
        {-1, -1, p1 * n * (n_p - nn) / n1, true},
        {+1, +1, p2 * n * (n_p - nn) / n1, true},
        {-1, 0, p1 * n * gap / n1, true},
        {0, +1, p2 * (n_p - nn) * gap / n1, true},
        {+1, 0, p2 * n * gap / n1, true},
        {0, -1, p1 * (n_p - nn) * gap / n1, true},
    };
}

// lambda_u = min_k [ d_{k+1} - d_k u_{k-1}/u_k + b_k - b_{k+1} u_{k+1}/u_k ]
// over k in {0..N-1}, with the convention u_{-1} = u_N = 0.
inline double lambda_u(const TwoPointParams& tp, const std::vector<double>& u) {
    validate_params(tp);
    const int n_p = tp.particles;
    if (static_cast<int>(u.size()) != n_p)
        throw std::invalid_argument("lambda_u: weight length must equal N");
    for (double v : u)
        if (!(v > 0.0)) throw std::invalid_argument("lambda_u: weights must be positive");
    const BirthDeathSpec s = birth_death_reduction(tp);
    double best = 0.0;
    for (int k = 0; k < n_p; ++k) {
        double term = s.death[k + 1] + s.birth[k];
        if (k > 0) term -= s.death[k] * u[k - 1] / u[k];
        if (k + 1 < n_p) term -= s.birth[k + 1] * u[k + 1] / u[k];
        if (k == 0 || term < best) best = term;
    }
    return best;
}

inline double fv_gap_exact(const TwoPointParams& tp, std::size_t cap = 5000) {
    const BirthDeathSpec s = birth_death_reduction(tp);
    const SpectralReport rep = tridiagonal_spectrum(s, birth_death_stationary(s), cap);
    if (!rep.gap) throw std::runtime_error("fv_gap_exact: no positive eigenvalue");
    return *rep.gap;
}

struct LambdaUOptimum {
    std::vector<double> weights;
    double value = 0.0;
};

namespace detail {

// Weights read off the second eigenfunction g of the birth-death generator:
// u_k = g(k+1) - g(k) attains the spectral gap exactly, up to solver noise.
inline std::vector<double> eigenvector_weights(const BirthDeathSpec& s,
                                               const FiniteDistribution& pi, double gap) {
    const std::size_t n = s.top();
    std::vector<double> diag(n + 1), off(n);
    for (std::size_t k = 0; k <= n; ++k) diag[k] = s.birth[k] + s.death[k];
    for (std::size_t k = 0; k < n; ++k) off[k] = -std::sqrt(s.birth[k] * s.death[k + 1]);
    const std::vector<double> x = tridiagonal_eigenvector(diag, off, gap);
    std::vector<double> u(n);
    double peak = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double g1 = x[k + 1] / std::sqrt(pi.weights[k + 1]);
        const double g0 = x[k] / std::sqrt(pi.weights[k]);
        u[k] = g1 - g0;
        peak = std::max(peak, std::abs(u[k]));
    }
    double total = 0.0;
    for (double v : u) total += v;
    if (total < 0.0)
        for (double& v : u) v = -v;
    for (double& v : u) v = std::max(v, 1e-12 * peak);
    return u;
}

}  // namespace detail

// Best-effort maximization of lambda_u: coordinate search with multiplicative
// steps on the weights, restarted from the flat profile and from the
// eigenfunction-derived profile. Any returned value is a certified lower
// bound for the gap; the eigenfunction start makes it sharp in practice.
inline LambdaUOptimum optimize_lambda_u(const TwoPointParams& tp, double tol = 1e-9,
                                        int max_passes = 400) {
    validate_params(tp);
    const int n_p = tp.particles;
    const BirthDeathSpec s = birth_death_reduction(tp);
    const FiniteDistribution pi = birth_death_stationary(s);
    const double target = fv_gap_exact(tp);

    auto ascend = [&](std::vector<double> u) {
        double value = lambda_u(tp, u);
        const double steps[] = {2.0, 1.25, 1.05, 1.01, 1.001};
        for (int pass = 0; pass < max_passes && value < target - tol; ++pass) {
            bool improved = false;
            for (int k = 0; k < n_p; ++k) {
                for (double f : steps) {
                    for (double factor : {f, 1.0 / f}) {
                        const double saved = u[k];
                        u[k] *= factor;
                        const double v = lambda_u(tp, u);
                        if (v > value) {
                            value = v;
                            improved = true;
                        } else {
                            u[k] = saved;
                        }
                    }
                }
            }
            if (!improved) break;
        }
        return LambdaUOptimum{std::move(u), value};
    };

    LambdaUOptimum best = ascend(std::vector<double>(n_p, 1.0));
    LambdaUOptimum eig = ascend(detail::eigenvector_weights(s, pi, target));
    if (eig.value > best.value) best = std::move(eig);
    return best;
}

struct HardyReport {
    int split = 0;         // m_N
    double b_plus = 0.0;   // B_{N,+}(m_N)
    double b_minus = 0.0;  // B_{N,-}(m_N)
    double lower = 0.0;    // 1 / (4 max(b_plus, b_minus))
};

namespace detail {

inline double log_sum_exp_add(double acc, double term) {
    if (acc == -1e300) return term;
    const double hi = std::max(acc, term), lo = std::min(acc, term);
    return hi + std::log1p(std::exp(lo - hi));
}

// Mode index chosen from the roots of the quadratic governing the ratio
// pi(i+1)/pi(i): m_N = floor(i1) + 1 where i1 is the smaller root, after the
// site relabeling that makes kill_1 >= kill_2. Falls back to a direct scan
// when the quadratic degenerates.
inline int hardy_split(const TwoPointParams& tp, const FiniteDistribution& pi) {
    const int n_p = tp.particles;
    const double a = tp.jump_12, b = tp.jump_21;
    const double p1 = tp.kill_1, p2 = tp.kill_2;
    auto scan_mode = [&]() {
        int m = 0;
        for (int i = 1; i <= n_p; ++i)
            if (pi.weights[i] > pi.weights[m]) m = i;
        return m;
    };
    const double qa = p1 - p2;
    if (std::abs(qa) < 1e-14 * (p1 + p2 + 1.0)) return scan_mode();
    const double qb = p2 * n_p - (a + b) * (n_p - 1.0) - p1 * (n_p - 2.0);
    const double qc = (n_p - 1.0) * (b * n_p - a - p1);
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) return scan_mode();
    const double root = std::sqrt(disc);
    const double q = -0.5 * (qb + std::copysign(root, qb));
    double r1 = q / qa;
    double r2 = (q != 0.0) ? qc / q : r1;
    if (r1 > r2) std::swap(r1, r2);
    const double i1 = (qa > 0.0) ? r1 : r2;  // root on the increasing side of the ratio
    int m = static_cast<int>(std::floor(i1)) + 1;
    return std::clamp(m, 0, n_p);
}

}  // namespace detail

// Hardy-type lower bound on the spectral gap: 1/(4 max(B+, B-)) with the
// weighted double sums evaluated exactly in log space (they are invariant
// under the normalization of pi, so no underflow is possible).
inline HardyReport hardy_bound(const TwoPointParams& tp) {
    validate_params(tp);
    TwoPointParams work = tp;
    const bool mirrored = tp.kill_2 > tp.kill_1;
    if (mirrored) {
        std::swap(work.jump_12, work.jump_21);
        std::swap(work.kill_1, work.kill_2);
    }
    const int n_p = work.particles;
    const BirthDeathSpec s = birth_death_reduction(work);

    std::vector<double> logpi(n_p + 1, 0.0);
    for (int k = 1; k <= n_p; ++k)
        logpi[k] = logpi[k - 1] + std::log(s.birth[k - 1]) - std::log(s.death[k]);

    const FiniteDistribution pi = birth_death_stationary(s);
    const int m = detail::hardy_split(work, pi);

    HardyReport rep;
    rep.split = m;

    // The unnormalized weights are enough: the normalizer cancels between the
    // reciprocal series and the tail mass.
    std::vector<double> tail(n_p + 2, -1e300);  // log pi([x, N])
    for (int x = n_p; x >= 0; --x) tail[x] = detail::log_sum_exp_add(tail[x + 1], logpi[x]);
    std::vector<double> head(n_p + 1, -1e300);  // log pi([0, x])
    for (int x = 0; x <= n_p; ++x) head[x] = detail::log_sum_exp_add(x > 0 ? head[x - 1] : -1e300, logpi[x]);

    double log_bplus = -1e300;
    double series = -1e300;  // log sum_{y=m+1..x} 1/(pi(y) d_y)
    for (int x = m + 1; x <= n_p; ++x) {
        series = detail::log_sum_exp_add(series, -logpi[x] - std::log(s.death[x]));
        log_bplus = std::max(log_bplus, series + tail[x]);
    }
    double log_bminus = -1e300;
    series = -1e300;  // log sum_{y=x..m-1} 1/(pi(y) b_y), built downward
    for (int x = m - 1; x >= 0; --x) {
        series = detail::log_sum_exp_add(series, -logpi[x] - std::log(s.birth[x]));
        log_bminus = std::max(log_bminus, series + head[x]);
    }
    rep.b_plus = (log_bplus == -1e300) ? 0.0 : std::exp(log_bplus);
    rep.b_minus = (log_bminus == -1e300) ? 0.0 : std::exp(log_bminus);
    // Report in the caller's orientation: the relabeling reverses the count
    // axis, which exchanges the two one-sided sums.
    if (mirrored) {
        rep.split = n_p - m;
        std::swap(rep.b_plus, rep.b_minus);
    }
    const double worst = std::max(rep.b_plus, rep.b_minus);
    rep.lower = (worst > 0.0) ? 1.0 / (4.0 * worst) : 0.0;
    return rep;
}

// One row of the gap-versus-N table behind the four qualitative regimes.
struct GapReport {
    int particles = 0;
    double lambda_cond = 0.0;   // lambda_plus - lambda_minus
    double rho = 0.0;
    double lambda_n = 0.0;      // exact spectral gap of the FV chain
    double hardy_lower = 0.0;
    double lambda_u_best = 0.0;
};

inline GapReport gap_report(TwoPointParams tp) {
    GapReport row;
    row.particles = tp.particles;
    const ConvergenceRates rates = conditioned_convergence_rate(tp);
    row.lambda_cond = rates.conditioned;
    row.rho = rates.rho;
    row.lambda_n = fv_gap_exact(tp);
    row.hardy_lower = hardy_bound(tp).lower;
    row.lambda_u_best = optimize_lambda_u(tp).value;
    return row;
}

inline std::vector<GapReport> gap_curve(const TwoPointParams& base, const std::vector<int>& grid,
                                        unsigned threads = 0) {
    for (int n : grid)
        if (n < 2) throw std::invalid_argument("gap_curve: particle counts must be >= 2");
    std::vector<GapReport> rows(grid.size());
    detail::run_replicas(grid.size(), 0, threads, [&](std::size_t i, CounterRng&) {
        TwoPointParams tp = base;
        tp.particles = grid[i];
        rows[i] = gap_report(tp);
    });
    return rows;
}

// Closed upper bound on |cov(eta_t(k)/N, eta_t(l)/N)|; the rho = 0 case
// takes the limit (1 - e^{-2 rho t})/rho -> 2t.
inline double correlation_bound(const TwoPointParams& tp, double t) {
    validate_params(tp);
    if (t < 0.0) throw std::domain_error("correlation_bound: negative time");
    const double n = tp.particles;
    const double rho = tp.jump_12 + tp.jump_21 - std::abs(tp.kill_1 - tp.kill_2);
    const double window =
        (std::abs(rho) < 1e-14) ? 2.0 * t : (1.0 - std::exp(-2.0 * rho * t)) / rho;
    const double drive = n * std::max(tp.jump_12, tp.jump_21) +
                         std::max(tp.kill_1, tp.kill_2) * n * n / (n - 1.0);
    return 2.0 / (n * n) * window * drive;
}

// Exact cov(eta_t(1), eta_t(2)) = -Var(eta_t(1)) for a deterministic start,
// from the matrix exponential of the birth-death generator.
inline double covariance_exact(const TwoPointParams& tp, int n0, double t) {
    validate_params(tp);
    if (n0 < 0 || n0 > tp.particles) throw std::invalid_argument("covariance_exact: bad start");
    const BirthDeathSpec s = birth_death_reduction(tp);
    Matrix g = birth_death_generator(s);
    g *= t;
    const Matrix pt = matrix_exponential(std::move(g));
    double m1 = 0.0, m2 = 0.0;
    for (int x = 0; x <= tp.particles; ++x) {
        const double pr = pt(n0, x);
        m1 += pr * x;
        m2 += pr * static_cast<double>(x) * x;
    }
    return -(m2 - m1 * m1);
}

}  // namespace fvlab
