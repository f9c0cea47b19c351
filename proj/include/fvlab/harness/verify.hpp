#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fvlab/chain.hpp"
#include "fvlab/complete_graph.hpp"
#include "fvlab/coupling.hpp"
#include "fvlab/harness/config.hpp"
#include "fvlab/monte_carlo.hpp"
#include "fvlab/simulate.hpp"
#include "fvlab/spectral.hpp"
#include "fvlab/two_point.hpp"

namespace fvlab {

// One verification check: a closed-form claim of the model packs held
// against an independent oracle (linear algebra, numerical integration, or
// exact simulation). Tolerances are pinned here, next to the check.
struct CheckResult {
    std::string id;
    bool pass = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string details;
};

struct VerifyContext {
    std::uint64_t seed = 0xF1E71;
    unsigned threads = 0;      // 0 = hardware concurrency
    std::string out_dir;       // when set, checks may export their CSV artifacts
};

namespace verify_detail {

inline double uniform(CounterRng& rng, double lo, double hi) {
    return lo + (hi - lo) * rng.uniform01();
}

inline int uniform_int(CounterRng& rng, int lo, int hi) {
    return lo + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline std::string fmt(double v) { return format_double(v); }

// Classical fourth-order integration of y' = f(t, y). The verification
// oracles integrate the moment systems directly instead of trusting any
// closed-form solution.
template <typename F>
std::vector<double> rk4(F&& f, std::vector<double> y, double t0, double t1, int steps) {
    const double h = (t1 - t0) / steps;
    std::vector<double> k1, k2, k3, k4, tmp(y.size());
    for (int s = 0; s < steps; ++s) {
        const double t = t0 + s * h;
        k1 = f(t, y);
        for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        k2 = f(t + 0.5 * h, tmp);
        for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        k3 = f(t + 0.5 * h, tmp);
        for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + h * k3[i];
        k4 = f(t + h, tmp);
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return y;
}

// Moment system of the complete-graph process for sites k != l, closed under
// the generator: means relax at unit rate toward N/K and the cross moment
// couples to their sum.
struct MomentField {
    double n, k, p;
    std::vector<double> operator()(double, const std::vector<double>& y) const {
        const double alpha = 2.0 * (n - 1.0 + p) / (n - 1.0);
        return {n / k - y[0], n / k - y[1], -alpha * y[2] + ((n - 1.0) / k) * (y[0] + y[1])};
    }
};

inline CheckResult cg_invariant_oracle(const VerifyContext&) {
    CheckResult r{"cg-invariant-oracle", false, 0.0, 1e-11, ""};
    for (int k : {2, 3})
        for (int n : {2, 3, 4})
            for (double p : {1.0 / 3.0, 0.5, 1.0}) {
                const CompleteGraphParams cg{k, p, n};
                const FiniteDistribution closed = invariant_law(cg);
                const FiniteDistribution oracle =
                    stationary_distribution(fv_generator_matrix(complete_graph_fv(cg)));
                for (std::size_t s = 0; s < closed.weights.size(); ++s)
                    r.measured = std::max(r.measured,
                                          std::abs(closed.weights[s] - oracle.weights[s]));
            }
    r.pass = r.measured <= r.tolerance;
    r.details = "product-form law vs linear solve on 18 (K, N, p) instances";
    return r;
}

inline CheckResult cg_binomial_z(const VerifyContext&) {
    CheckResult r{"cg-binomial-z", true, 0.0, 0.0, ""};
    std::ostringstream d;
    int cases = 0;
    for (int k : {2, 3})
        for (int n : {2, 3, 5}) {
            const CompleteGraphParams cg{k, 1.0 / k, n};
            const auto states = enumerate_configurations(k, n);
            BigInt sum = 0;
            for (const auto& s : states) sum += binomial_weight_integer(cg, s);
            const BigInt z = binomial_normalizer(cg);
            if (sum != z) {
                r.pass = false;
                r.measured += 1.0;
            }
            if (cases++) d << " ";
            d << "Z(K=" << k << ",N=" << n << ")=" << z.str();
        }
    r.details = d.str();
    return r;
}

inline CheckResult cg_correlation_ode(const VerifyContext&) {
    CheckResult r{"cg-correlation-ode", false, 0.0, 1e-6, ""};
    const std::vector<double> grid = {0.0, 0.5, 1.0, 2.0, 5.0};
    double ref_dev = 0.0;
    for (int k : {2, 3})
        for (int n : {5, 20})
            for (double p : {0.5, 1.0}) {
                const CompleteGraphParams cg{k, p, n};
                const double nn = n, kk = k;
                const std::vector<MomentTriple> starts = {
                    {nn, 0.0, 0.0},
                    {nn / kk, nn / kk, nn * nn / (kk * kk)},
                    {0.3 * nn, 0.2 * nn, 0.05 * nn * nn},
                };
                for (const MomentTriple& m0 : starts) {
                    std::vector<double> y = {m0.mean_k, m0.mean_l, m0.cross};
                    double t_prev = 0.0;
                    for (double t : grid) {
                        const int steps = std::max(1, static_cast<int>(std::lround((t - t_prev) * 512)));
                        if (t > t_prev) y = rk4(MomentField{nn, kk, p}, y, t_prev, t, steps);
                        t_prev = t;
                        const double ode_cov = y[2] - y[0] * y[1];
                        const double formula = covariance_dynamics(cg, 1, 2, m0, t);
                        const double reference = covariance_dynamics_reference(cg, 1, 2, m0, t);
                        r.measured = std::max(r.measured, std::abs(formula - ode_cov));
                        ref_dev = std::max(ref_dev, std::abs(reference - ode_cov));
                    }
                }
            }
    r.pass = r.measured <= r.tolerance;
    r.details = "ODE oracle authoritative; four-term reference display deviates by up to " +
                fmt(ref_dev) + " on the same grid";
    return r;
}

inline CheckResult cg_stationary_cov(const VerifyContext&) {
    CheckResult r{"cg-stationary-cov", false, 0.0, 1e-10, ""};
    auto track = [&r](double diff) { r.measured = std::max(r.measured, std::abs(diff)); };

    const CompleteGraphParams pinned{2, 1.0, 10};
    const StationaryCovariance sc = stationary_covariance(pinned);
    track(sc.variance - 4.75);
    track(sc.normalized - (-0.0475));

    for (const CompleteGraphParams& cg :
         {CompleteGraphParams{2, 1.0, 10}, CompleteGraphParams{3, 0.5, 7}}) {
        const StationaryCovariance s = stationary_covariance(cg);
        const double mean = static_cast<double>(cg.particles) / cg.sites;
        const auto states = enumerate_configurations(cg.sites, cg.particles);
        const FiniteDistribution law = invariant_law(cg);
        double var = 0.0, cross = 0.0;
        for (std::size_t s2 = 0; s2 < states.size(); ++s2) {
            const double c0 = states[s2].counts[0] - mean;
            var += law.weights[s2] * c0 * c0;
            cross += law.weights[s2] * states[s2].counts[0] * states[s2].counts[1];
        }
        track(s.variance - var);
        track(s.covariance - (cross - mean * mean));
    }

    const CompleteGraphParams large{3, 0.5, 10000};
    const StationaryCovariance sl = stationary_covariance(large);
    const double ratio = std::abs(sl.normalized) / sl.asymptote;
    r.pass = r.measured <= r.tolerance && std::abs(ratio - 1.0) <= 5e-4;
    r.details = "pinned values, exact-summation oracle, asymptote ratio at N=10^4: " + fmt(ratio);
    return r;
}

inline CheckResult cg_chaos_bound(const VerifyContext&) {
    CheckResult r{"cg-chaos-bound", true, 0.0, 1.0, ""};
    for (int k : {2, 3})
        for (int n : {2, 3, 4})
            for (double p : {1.0 / 3.0, 0.5, 1.0}) {
                const CompleteGraphParams cg{k, p, n};
                // L^1 convention throughout: the half-distance version only
                // loosens the inequality, so this is the stronger statement.
                const BigRat lhs = exact_l1_to_uniform(cg);
                const BigRat bound_sq = BigRat(k) * (BigRat(p) + 1) / n;
                if (lhs * lhs > bound_sq) r.pass = false;
                r.measured = std::max(
                    r.measured, std::sqrt(static_cast<double>(lhs * lhs / bound_sq)));
            }
    r.details = "exact rational E[L1 distance to uniform] vs sqrt(K(p+1)/N); "
                "worst ratio includes the tight K=3, N=2, p=1/3 corner";
    return r;
}

inline CheckResult cg_spectrum_inclusion(const VerifyContext&) {
    CheckResult r{"cg-spectrum-inclusion", false, 0.0, 1e-7, ""};
    double gap_err = 0.0;
    for (int n : {3, 5})
        for (double p : {0.5, 1.0}) {
            const CompleteGraphParams cg{2, p, n};
            const SpectralReport rep = dense_spectrum(fv_generator_matrix(complete_graph_fv(cg)));
            const std::vector<double> candidates = spectrum_enumeration(cg);
            for (double ev : rep.eigenvalues) {
                double best = 1e300;
                for (double c : candidates) best = std::min(best, std::abs(ev - c));
                r.measured = std::max(r.measured, best);
            }
            if (!rep.gap) throw std::runtime_error("cg-spectrum-inclusion: missing gap");
            gap_err = std::max(gap_err, std::abs(*rep.gap - 1.0));
        }
    r.pass = r.measured <= r.tolerance && gap_err <= 1e-8;
    r.details = "every dense eigenvalue sits on the block-sum candidate list; |gap-1| <= " +
                fmt(gap_err);
    return r;
}

inline CheckResult cg_wasserstein_contraction(const VerifyContext& ctx) {
    CheckResult r{"cg-wasserstein-contraction", true, 0.0, 0.0, ""};
    const CompleteGraphParams cg{3, 1.0, 30};
    const FvModel m = complete_graph_fv(cg);
    const Configuration ea{{30, 0, 0}};
    const Configuration eb{{15, 15, 0}};
    const double d0 = config_distance(ea, eb);
    const std::vector<double> times = {0.5, 1.0, 2.0};
    const McVectorResult mc = mc_estimate_vector(
        [&](std::size_t, CounterRng& rng) {
            const CoupledTrajectory ct = simulate_coupled(m, ea, eb, 2.0, rng, times);
            std::vector<double> d(times.size());
            for (std::size_t i = 0; i < times.size(); ++i)
                d[i] = config_distance(ct.checkpoints[i].first, ct.checkpoints[i].second);
            return d;
        },
        times.size(), 20000, ctx.seed, ctx.threads);
    std::ostringstream d;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double target = std::exp(-times[i]) * d0;
        const double slack = 1.0 + 3.0 * mc.stderr_[i] / mc.mean[i];
        r.measured = std::max(r.measured, mc.mean[i] / target);
        r.tolerance = std::max(r.tolerance, slack);
        if (mc.mean[i] > target * slack) r.pass = false;
        d << "t=" << times[i] << ": E[d]=" << fmt(mc.mean[i]) << " target " << fmt(target) << "; ";
    }
    r.details = d.str() + "20000 coupled replicas, d0=" + fmt(d0);
    return r;
}

inline CheckResult tp_eigensystem(const VerifyContext& ctx) {
    CheckResult r{"tp-eigensystem", false, 0.0, 1e-12, ""};
    CounterRng rng = CounterRng::for_replica(ctx.seed, 108);
    bool separation = true;
    double qsd_err = 0.0;
    for (int it = 0; it < 100; ++it) {
        TwoPointParams tp;
        tp.jump_12 = uniform(rng, 0.2, 5.0);
        tp.jump_21 = uniform(rng, 0.2, 5.0);
        tp.kill_1 = uniform(rng, 0.0, 4.0);
        tp.kill_2 = uniform(rng, 0.0, 4.0);
        if (tp.kill_1 + tp.kill_2 < 1e-6) tp.kill_1 += 0.5;
        tp.particles = 2;
        const KilledEigensystem es = killed_eigensystem(tp);
        const auto numeric = general_eigenvalues(two_point_chain(tp).killed());
        std::vector<double> num = {numeric[0].real(), numeric[1].real()};
        std::sort(num.begin(), num.end());
        const double scale = std::max(1.0, std::abs(es.lambda_minus));
        r.measured = std::max(r.measured, std::abs(num[1] - es.lambda_plus) / scale);
        r.measured = std::max(r.measured, std::abs(num[0] - es.lambda_minus) / scale);
        const double gap = conditioned_gap(tp);
        r.measured = std::max(r.measured,
                              std::abs(gap - (es.lambda_plus - es.lambda_minus)) / scale);
        const ConvergenceRates cr = conditioned_convergence_rate(tp);
        if (tp.kill_1 != tp.kill_2 && !(cr.conditioned > cr.rho)) separation = false;
        const QsdResult qsd = qsd_principal(two_point_chain(tp));
        for (int s = 0; s < 2; ++s)
            qsd_err = std::max(qsd_err, std::abs(qsd.law.weights[s] - es.qsd.weights[s]));
    }
    r.pass = r.measured <= r.tolerance && separation && qsd_err <= 1e-9;
    r.details = std::string("100 random rate sets; closed eigenpair vs dense solver; ") +
                (separation ? "conditioned rate exceeds rho whenever kills differ"
                            : "SEPARATION VIOLATED") +
                "; qsd residual " + fmt(qsd_err);
    return r;
}

inline CheckResult tp_birth_death_equiv(const VerifyContext&) {
    CheckResult r{"tp-birth-death-equiv", true, 0.0, 0.0, ""};
    const std::vector<TwoPointParams> sets = {
        {1.0, 2.0, 0.5, 1.5, 2}, {0.3, 0.7, 2.0, 0.0, 2}, {1.0, 1.0, 0.0, 1.0, 2}};
    for (TwoPointParams tp : sets)
        for (int n = 2; n <= 20; ++n) {
            tp.particles = n;
            const Matrix full = fv_generator_matrix(two_point_fv(tp));
            const Matrix reduced = birth_death_generator(birth_death_reduction(tp));
            for (int i = 0; i <= n; ++i)
                for (int j = 0; j <= n; ++j)
                    if (full(i, j) != reduced(i, j)) r.measured += 1.0;
        }
    r.pass = r.measured == 0.0;
    r.details = "two-site interacting generator and its birth-death reduction agree entrywise "
                "(bitwise) for N=2..20";
    return r;
}

inline TwoPointParams random_unimodal_params(CounterRng& rng, int n_max) {
    TwoPointParams tp;
    tp.jump_12 = uniform(rng, 0.3, 3.0);
    tp.jump_21 = uniform(rng, 0.3, 3.0);
    tp.kill_1 = uniform(rng, 0.0, 3.0);
    tp.kill_2 = uniform(rng, 0.0, 3.0);
    const int lo = std::max({5, static_cast<int>(std::ceil(1.0 + tp.kill_1 / tp.jump_12)),
                             static_cast<int>(std::ceil(1.0 + tp.kill_2 / tp.jump_21))});
    tp.particles = uniform_int(rng, lo, n_max);
    return tp;
}

inline CheckResult tp_pi_oracle(const VerifyContext& ctx) {
    CheckResult r{"tp-pi-oracle", false, 0.0, 1e-11, ""};
    CounterRng rng = CounterRng::for_replica(ctx.seed, 110);
    bool unimodal_ratios = true;
    double binom_dev = 0.0;
    for (int it = 0; it < 50; ++it) {
        const TwoPointParams tp = random_unimodal_params(rng, 100);
        const BirthDeathSpec s = birth_death_reduction(tp);
        const FiniteDistribution pi = invariant_pi(tp);
        const FiniteDistribution oracle = stationary_distribution(birth_death_generator(s));
        const FiniteDistribution binom = pi_binomial_form(tp);
        for (int n = 0; n <= tp.particles; ++n) {
            r.measured = std::max(r.measured, std::abs(pi.weights[n] - oracle.weights[n]));
            binom_dev = std::max(binom_dev, std::abs(pi.weights[n] - binom.weights[n]));
        }
        // pi(n+1)/pi(n) = birth(n)/death(n+1) must decrease strictly when
        // a(N-1) >= p01 and b(N-1) >= p02, which the draw guarantees.
        double prev = 1e300;
        for (int n = 0; n < tp.particles; ++n) {
            const double ratio = s.birth[n] / s.death[n + 1];
            if (!(ratio < prev * (1.0 + 1e-12))) unimodal_ratios = false;
            prev = ratio;
        }
    }
    r.pass = r.measured <= r.tolerance && unimodal_ratios && binom_dev <= 1e-12;
    r.details = std::string("50 draws, N<=100; linear-solve oracle; binomial rewrite deviates ") +
                fmt(binom_dev) + (unimodal_ratios ? "; ratios strictly decreasing"
                                                  : "; RATIO MONOTONICITY VIOLATED");
    return r;
}

inline CheckResult tp_variational_gap(const VerifyContext& ctx) {
    CheckResult r{"tp-variational-gap", false, 1e300, 0.99, ""};
    CounterRng rng = CounterRng::for_replica(ctx.seed, 111);
    bool upper_bound = true;
    for (int it = 0; it < 10; ++it) {
        TwoPointParams tp;
        tp.jump_12 = uniform(rng, 0.2, 3.0);
        tp.jump_21 = uniform(rng, 0.2, 3.0);
        tp.kill_1 = uniform(rng, 0.0, 4.0);
        tp.kill_2 = uniform(rng, 0.0, 4.0);
        tp.particles = uniform_int(rng, 5, 60);
        const double gap = fv_gap_exact(tp);
        std::vector<double> u(tp.particles);
        for (int trial = 0; trial < 1000; ++trial) {
            for (double& v : u) v = std::exp(uniform(rng, -1.5, 1.5));
            if (lambda_u(tp, u) > gap + 1e-9 * std::max(1.0, gap)) upper_bound = false;
        }
        const LambdaUOptimum opt = optimize_lambda_u(tp);
        r.measured = std::min(r.measured, opt.value / gap);
    }
    r.pass = upper_bound && r.measured >= r.tolerance;
    r.details = std::string("10 rate sets, N<=60, 1000 random weights each; ") +
                (upper_bound ? "lambda_u never exceeds the exact gap" : "UPPER BOUND VIOLATED") +
                "; worst optimized ratio " + fmt(r.measured);
    return r;
}

inline CheckResult tp_hardy_bound(const VerifyContext& ctx) {
    CheckResult r{"tp-hardy-bound", false, 0.0, 1.0, ""};
    CounterRng rng = CounterRng::for_replica(ctx.seed, 112);
    double stress_min = 1e300;
    bool positive = true;
    auto probe = [&](const TwoPointParams& tp) {
        const HardyReport h = hardy_bound(tp);
        const double gap = fv_gap_exact(tp);
        r.measured = std::max(r.measured, h.lower / gap);
        if (!(h.lower > 0.0)) positive = false;
        return h.lower;
    };
    for (int it = 0; it < 25; ++it) probe(random_unimodal_params(rng, 100));
    for (int n = 20; n <= 200; n += 20) {
        const TwoPointParams stress{0.1, 0.1, 5.0, 0.0, n};
        stress_min = std::min(stress_min, probe(stress));
    }
    r.pass = r.measured <= r.tolerance * (1.0 + 1e-9) && positive && stress_min > 0.0;
    r.details = "lower bound never exceeds the exact gap; strongly killed stress set "
                "(kill ratio infinite) stays positive, min " + fmt(stress_min);
    return r;
}

inline CheckResult tp_figure1_regimes(const VerifyContext& ctx) {
    CheckResult r{"tp-figure1-regimes", false, 0.0, 1e-8, ""};
    const std::vector<std::string> names = {"regime-i", "regime-ii", "regime-iii", "regime-iv",
                                            "constant-p0"};
    bool crossing_below = false, crossing_above = false, non_monotone = false;
    for (const std::string& name : names) {
        const ExperimentConfig cfg = preset_config(name);
        const std::vector<GapReport> rows = gap_curve(cfg.tp, cfg.n_grid, ctx.threads);
        if (!ctx.out_dir.empty()) {
            std::ofstream out(ctx.out_dir + "/gap_curve_" + name + ".csv");
            out << "N,lambda_cond,rho,lambda_N,hardy_lower,lambda_u_best\n";
            for (const GapReport& g : rows)
                out << g.particles << "," << fmt(g.lambda_cond) << "," << fmt(g.rho) << ","
                    << fmt(g.lambda_n) << "," << fmt(g.hardy_lower) << ","
                    << fmt(g.lambda_u_best) << "\n";
        }
        if (name == "constant-p0") {
            const double ab = cfg.tp.jump_12 + cfg.tp.jump_21;
            for (const GapReport& g : rows) {
                r.measured = std::max(r.measured, std::abs(g.lambda_n - ab));
                r.measured = std::max(r.measured, std::abs(g.lambda_cond - ab));
                r.measured = std::max(r.measured, std::abs(g.rho - ab));
            }
        }
        if (name == "regime-iii") {
            const double lam = rows.front().lambda_cond;
            double prev_slope = 0.0;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i].lambda_n < lam - 1e-6) crossing_below = true;
                if (rows[i].lambda_n > lam + 1e-6) crossing_above = true;
                if (i > 0) {
                    const double slope = rows[i].lambda_n - rows[i - 1].lambda_n;
                    if (slope * prev_slope < 0.0) non_monotone = true;
                    if (std::abs(slope) > 1e-12) prev_slope = slope;
                }
            }
        }
    }
    r.pass = r.measured <= r.tolerance && crossing_below && crossing_above && non_monotone;
    std::ostringstream d;
    d << "constant kill collapses all rates to a+b (max dev " << fmt(r.measured) << "); "
      << "asymmetric regime crosses the conditioned rate "
      << (crossing_below && crossing_above ? "from both sides" : "ONLY PARTIALLY")
      << (non_monotone ? " and is non-monotone in N" : " but LOOKS MONOTONE");
    r.details = d.str();
    return r;
}

inline CheckResult fv_ssa_correctness(const VerifyContext& ctx) {
    CheckResult r{"fv-ssa-correctness", false, 0.0, 5.0, ""};
    const CompleteGraphParams cg{3, 1.0, 13};
    const FvModel m = complete_graph_fv(cg);
    const auto states = enumerate_configurations(3, 13);
    const Configuration eta0{{13, 0, 0}};
    const double t = 1.0;

    Matrix gen = fv_generator_matrix(m);
    gen *= t;
    const Matrix pt = matrix_exponential(std::move(gen));
    const std::size_t row = configuration_rank(eta0);

    const std::size_t replicas = 100000;
    std::vector<std::uint32_t> rank_of(replicas);
    detail::run_replicas(replicas, ctx.seed, ctx.threads, [&](std::size_t rep, CounterRng& rng) {
        const Trajectory tr = simulate(m, eta0, t, rng, false);
        rank_of[rep] = static_cast<std::uint32_t>(configuration_rank(tr.final_config));
    });
    std::vector<double> counts(states.size(), 0.0);
    for (std::uint32_t s : rank_of) counts[s] += 1.0;

    double l1 = 0.0, se = 0.0;
    for (std::size_t s = 0; s < states.size(); ++s) {
        const double p = pt(row, s);
        l1 += std::abs(counts[s] / replicas - p);
        se += std::sqrt(std::max(0.0, p * (1.0 - p)) / replicas);
    }
    r.measured = l1 / se;
    r.pass = r.measured <= r.tolerance;
    r.details = "empirical law of 10^5 exact-simulation replicas vs matrix exponential on " +
                std::to_string(states.size()) + " states; L1=" + fmt(l1) +
                ", aggregate-sampling scale " + fmt(se);
    return r;
}

inline CheckResult tp_correlation_bound(const VerifyContext&) {
    CheckResult r{"tp-correlation-bound", false, 0.0, 1.0, ""};
    double loosest = 1e300;
    const std::vector<TwoPointParams> sets = {{1.0, 1.0, 0.0, 1.0, 2},
                                              {2.0, 1.0, 0.5, 0.0, 2},
                                              {1.0, 2.0, 1.0, 1.5, 2},
                                              {0.7, 1.3, 0.2, 0.9, 2}};
    for (TwoPointParams tp : sets)
        for (int n : {5, 10, 20, 40}) {
            tp.particles = n;
            for (int n0 : {0, n / 2})
                for (double t : {0.1, 0.5, 1.0, 2.0, 5.0}) {
                    const double cov = covariance_exact(tp, n0, t) / (static_cast<double>(n) * n);
                    const double bound = correlation_bound(tp, t);
                    const double ratio = std::abs(cov) / bound;
                    r.measured = std::max(r.measured, ratio);
                    loosest = std::min(loosest, ratio);
                }
        }
    r.pass = r.measured <= r.tolerance;
    r.details = "exact semigroup covariance vs closed bound on 160 (params, N, start, t) points; "
                "ratio range [" + fmt(loosest) + ", " + fmt(r.measured) + "]";
    return r;
}

inline CheckResult cg_mean_ode(const VerifyContext&) {
    CheckResult r{"cg-mean-ode", false, 0.0, 1e-9, ""};
    double display_dev = 0.0;
    for (int k : {2, 3})
        for (int n : {5, 20})
            for (double p : {0.5, 1.0}) {
                const CompleteGraphParams cg{k, p, n};
                const double nk = static_cast<double>(n) / k;
                for (double m0 : {0.0, static_cast<double>(n), nk, 0.3 * n})
                    for (double t : {0.25, 1.0, 3.0}) {
                        auto field = [&](double, const std::vector<double>& y) {
                            return std::vector<double>{nk - y[0]};
                        };
                        const double ode = rk4(field, {m0}, 0.0, t,
                                               std::max(1, static_cast<int>(t * 1024)))[0];
                        r.measured = std::max(r.measured,
                                              std::abs(mean_dynamics(cg, m0, t) - ode));
                        display_dev = std::max(display_dev,
                                               std::abs(m0 * std::exp(-t) + nk - ode));
                    }
            }
    r.pass = r.measured <= r.tolerance;
    r.details = "relaxation solution vs integrated ODE; the drift display without the "
                "(1-e^-t) factor misses by up to " + fmt(display_dev);
    return r;
}

}  // namespace verify_detail

struct VerifyCheck {
    const char* id;
    const char* scope;
    CheckResult (*run)(const VerifyContext&);
};

inline const std::vector<VerifyCheck>& verify_registry() {
    using namespace verify_detail;
    static const std::vector<VerifyCheck> reg = {
        {"cg-invariant-oracle", "complete-graph", cg_invariant_oracle},
        {"cg-binomial-z", "complete-graph", cg_binomial_z},
        {"cg-correlation-ode", "complete-graph", cg_correlation_ode},
        {"cg-stationary-cov", "complete-graph", cg_stationary_cov},
        {"cg-chaos-bound", "complete-graph", cg_chaos_bound},
        {"cg-spectrum-inclusion", "complete-graph", cg_spectrum_inclusion},
        {"cg-wasserstein-contraction", "complete-graph", cg_wasserstein_contraction},
        {"cg-mean-ode", "complete-graph", cg_mean_ode},
        {"tp-eigensystem", "two-point", tp_eigensystem},
        {"tp-birth-death-equiv", "two-point", tp_birth_death_equiv},
        {"tp-pi-oracle", "two-point", tp_pi_oracle},
        {"tp-variational-gap", "two-point", tp_variational_gap},
        {"tp-hardy-bound", "two-point", tp_hardy_bound},
        {"tp-figure1-regimes", "two-point", tp_figure1_regimes},
        {"tp-correlation-bound", "two-point", tp_correlation_bound},
        {"fv-ssa-correctness", "engine", fv_ssa_correctness},
    };
    return reg;
}

// The registry must cover the documented check list exactly once; a missing
// or duplicated id is a harness defect, not a model failure.
inline void assert_registry_complete() {
    static const std::set<std::string> expected = {
        "cg-invariant-oracle", "cg-binomial-z", "cg-correlation-ode", "cg-stationary-cov",
        "cg-chaos-bound", "cg-spectrum-inclusion", "cg-wasserstein-contraction", "cg-mean-ode",
        "tp-eigensystem", "tp-birth-death-equiv", "tp-pi-oracle", "tp-variational-gap",
        "tp-hardy-bound", "tp-figure1-regimes", "tp-correlation-bound", "fv-ssa-correctness"};
    std::set<std::string> seen;
    for (const VerifyCheck& c : verify_registry())
        if (!seen.insert(c.id).second)
            throw std::logic_error(std::string("verify registry: duplicate id ") + c.id);
    if (seen != expected) throw std::logic_error("verify registry: id set incomplete");
}

inline std::vector<CheckResult> run_checks(const VerifyContext& ctx, const std::string& scope) {
    assert_registry_complete();
    if (scope != "all" && scope != "engine" && scope != "complete-graph" && scope != "two-point")
        throw std::runtime_error("unknown scope '" + scope + "'");
    std::vector<CheckResult> out;
    for (const VerifyCheck& c : verify_registry())
        if (scope == "all" || scope == c.scope) out.push_back(c.run(ctx));
    return out;
}

}  // namespace fvlab
