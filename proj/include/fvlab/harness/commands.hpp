#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fvlab/harness/config.hpp"
#include "fvlab/harness/verify.hpp"

namespace fvlab {

namespace cmd_detail {

using json = nlohmann::json;

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    out << content;
}

inline std::string occupancy_label(const Configuration& eta) {
    std::string s;
    for (std::size_t i = 0; i < eta.counts.size(); ++i) {
        if (i) s += '|';
        s += std::to_string(eta.counts[i]);
    }
    return s;
}

// Wall time goes to the human-facing stdout summary only; file artifacts
// stay byte-identical across runs with the same seed.
inline void print_summary(json j, double wall_ms) {
    j["wall_time_ms"] = wall_ms;
    std::cout << j.dump() << "\n";
}

}  // namespace cmd_detail

inline int cmd_simulate(const ExperimentConfig& cfg) {
    cmd_detail::Stopwatch clock;
    const FvModel model = cfg.fv_model();
    const Configuration eta0 = cfg.start_configuration();
    CounterRng rng = CounterRng::for_replica(cfg.seed, 0);
    const Trajectory tr = simulate(model, eta0, cfg.horizon, rng);

    std::ostringstream csv;
    csv << "time,site_from,site_to,cause\n";
    std::size_t mutations = 0;
    for (const TrajectoryEvent& ev : tr.events) {
        csv << format_double(ev.time) << "," << ev.from + 1 << "," << ev.to + 1 << ","
            << (ev.cause == EventCause::mutation ? "mutation" : "interaction") << "\n";
        if (ev.cause == EventCause::mutation) ++mutations;
    }
    const std::string out = cfg.out.empty() ? "trajectory.csv" : cfg.out;
    cmd_detail::write_file(out, csv.str());

    cmd_detail::json j;
    j["command"] = "simulate";
    j["model"] = cfg.model;
    j["seed"] = cfg.seed;
    j["horizon"] = cfg.horizon;
    j["events"] = tr.events.size();
    j["mutations"] = mutations;
    j["interactions"] = tr.events.size() - mutations;
    j["final"] = tr.final_config.counts;
    j["out"] = out;
    cmd_detail::print_summary(j, clock.ms());
    return 0;
}

inline int cmd_gap_curve(const ExperimentConfig& cfg, unsigned threads = 0) {
    cmd_detail::Stopwatch clock;
    if (cfg.model != "two-point")
        throw std::runtime_error("gap-curve: only the two-point model has gap curves");
    std::vector<int> grid = cfg.n_grid;
    if (grid.empty())
        for (int n = 2; n <= 60; n += 2) grid.push_back(n);
    const std::vector<GapReport> rows = gap_curve(cfg.tp, grid, threads);

    std::ostringstream csv;
    csv << "N,lambda_cond,rho,lambda_N,hardy_lower,lambda_u_best\n";
    for (const GapReport& g : rows)
        csv << g.particles << "," << format_double(g.lambda_cond) << "," << format_double(g.rho)
            << "," << format_double(g.lambda_n) << "," << format_double(g.hardy_lower) << ","
            << format_double(g.lambda_u_best) << "\n";
    const std::string out = cfg.out.empty() ? "gap_curve.csv" : cfg.out;
    cmd_detail::write_file(out, csv.str());

    cmd_detail::json j;
    j["command"] = "gap-curve";
    j["rows"] = rows.size();
    j["out"] = out;
    cmd_detail::print_summary(j, clock.ms());
    return 0;
}

struct CorrelationRow {
    double t = 0.0;
    double analytic = 0.0;  // cov(eta_t(1)/N, eta_t(2)/N)
    double mc = 0.0;
    double mc_stderr = 0.0;
    double bound = 0.0;
    bool has_bound = false;
};

// Site-pair covariance at the configured times: the closed form against a
// replica Monte Carlo estimate, normalized by N^2 so the two-point rows are
// directly comparable to their a priori bound.
inline std::vector<CorrelationRow> correlations_table(const ExperimentConfig& cfg,
                                                      unsigned threads = 0) {
    const FvModel model = cfg.fv_model();
    const Configuration eta0 = cfg.start_configuration();
    std::vector<double> grid = cfg.t_grid;
    if (grid.empty()) grid = {0.25, 0.5, 1.0, 2.0, 4.0};
    const double horizon = grid.back();
    const std::size_t replicas = std::max<std::size_t>(cfg.replicas, 2);
    const double n = model.n_particles;

    // Per replica: eta(1) and eta(2) at every grid time, reconstructed by
    // replaying the event log.
    const std::size_t g = grid.size();
    std::vector<std::vector<double>> samples(replicas);
    detail::run_replicas(replicas, cfg.seed, threads, [&](std::size_t rep, CounterRng& rng) {
        const Trajectory tr = simulate(model, eta0, horizon, rng);
        std::vector<double> row(2 * g);
        std::vector<int> counts = eta0.counts;
        std::size_t next = 0;
        for (std::size_t i = 0; i < g; ++i) {
            while (next < tr.events.size() && tr.events[next].time <= grid[i]) {
                counts[tr.events[next].from] -= 1;
                counts[tr.events[next].to] += 1;
                ++next;
            }
            row[2 * i] = counts[0];
            row[2 * i + 1] = counts[1];
        }
        samples[rep] = std::move(row);
    });

    std::vector<CorrelationRow> rows(g);
    for (std::size_t i = 0; i < g; ++i) {
        double mk = 0.0, ml = 0.0;
        for (std::size_t rep = 0; rep < replicas; ++rep) {
            mk += samples[rep][2 * i];
            ml += samples[rep][2 * i + 1];
        }
        mk /= static_cast<double>(replicas);
        ml /= static_cast<double>(replicas);
        double mean_z = 0.0, var_z = 0.0;
        for (std::size_t rep = 0; rep < replicas; ++rep)
            mean_z += (samples[rep][2 * i] - mk) * (samples[rep][2 * i + 1] - ml);
        mean_z /= static_cast<double>(replicas);
        for (std::size_t rep = 0; rep < replicas; ++rep) {
            const double z = (samples[rep][2 * i] - mk) * (samples[rep][2 * i + 1] - ml);
            var_z += (z - mean_z) * (z - mean_z);
        }
        var_z /= static_cast<double>(replicas) * (static_cast<double>(replicas) - 1.0);

        CorrelationRow& row = rows[i];
        row.t = grid[i];
        row.mc = mean_z / (n * n);
        row.mc_stderr = std::sqrt(var_z) / (n * n);
        if (cfg.model == "two-point") {
            row.analytic = covariance_exact(cfg.tp, eta0.counts[0], grid[i]) / (n * n);
            row.bound = correlation_bound(cfg.tp, grid[i]);
            row.has_bound = true;
        } else {
            const MomentTriple m0{static_cast<double>(eta0.counts[0]),
                                  static_cast<double>(eta0.counts[1]),
                                  static_cast<double>(eta0.counts[0]) * eta0.counts[1]};
            row.analytic = covariance_dynamics(cfg.cg, 1, 2, m0, grid[i]) / (n * n);
        }
    }
    return rows;
}

inline int cmd_correlations(const ExperimentConfig& cfg, unsigned threads = 0) {
    cmd_detail::Stopwatch clock;
    const std::vector<CorrelationRow> rows = correlations_table(cfg, threads);

    std::ostringstream csv;
    csv << "t,cov_analytic,cov_mc,mc_stderr,bound\n";
    std::size_t within = 0;
    for (const CorrelationRow& row : rows) {
        csv << format_double(row.t) << "," << format_double(row.analytic) << ","
            << format_double(row.mc) << "," << format_double(row.mc_stderr) << ",";
        if (row.has_bound) csv << format_double(row.bound);
        csv << "\n";
        if (std::abs(row.analytic - row.mc) <= 4.0 * row.mc_stderr) ++within;
    }
    const std::string out = cfg.out.empty() ? "correlations.csv" : cfg.out;
    cmd_detail::write_file(out, csv.str());

    cmd_detail::json j;
    j["command"] = "correlations";
    j["rows"] = rows.size();
    j["replicas"] = std::max<std::size_t>(cfg.replicas, 2);
    j["within_4_stderr"] = within;
    j["out"] = out;
    cmd_detail::print_summary(j, clock.ms());
    return 0;
}

inline int cmd_invariant(const ExperimentConfig& cfg) {
    cmd_detail::Stopwatch clock;
    std::vector<std::string> labels;
    std::vector<double> closed, oracle;
    if (cfg.model == "complete-graph") {
        const auto states = enumerate_configurations(cfg.cg.sites, cfg.cg.particles);
        const FiniteDistribution law = invariant_law(cfg.cg);
        const FiniteDistribution solve =
            stationary_distribution(fv_generator_matrix(complete_graph_fv(cfg.cg)));
        for (std::size_t s = 0; s < states.size(); ++s) {
            labels.push_back(cmd_detail::occupancy_label(states[s]));
            closed.push_back(law.weights[s]);
            oracle.push_back(solve.weights[s]);
        }
    } else {
        const int n = cfg.tp.particles;
        const FiniteDistribution pi = invariant_pi(cfg.tp);
        const FiniteDistribution solve =
            stationary_distribution(birth_death_generator(birth_death_reduction(cfg.tp)));
        for (int x = 0; x <= n; ++x) {
            labels.push_back(cmd_detail::occupancy_label(Configuration{{x, n - x}}));
            closed.push_back(pi.weights[x]);
            oracle.push_back(solve.weights[x]);
        }
    }

    std::ostringstream csv;
    csv << "state,closed_form,linear_solve\n";
    double max_diff = 0.0;
    for (std::size_t s = 0; s < labels.size(); ++s) {
        csv << labels[s] << "," << format_double(closed[s]) << "," << format_double(oracle[s])
            << "\n";
        max_diff = std::max(max_diff, std::abs(closed[s] - oracle[s]));
    }
    const std::string out = cfg.out.empty() ? "invariant.csv" : cfg.out;
    cmd_detail::write_file(out, csv.str());

    cmd_detail::json j;
    j["command"] = "invariant";
    j["states"] = labels.size();
    j["max_abs_diff"] = max_diff;
    j["out"] = out;
    cmd_detail::print_summary(j, clock.ms());
    return 0;
}

inline int cmd_spectrum(const ExperimentConfig& cfg) {
    cmd_detail::Stopwatch clock;
    SpectralReport rep;
    if (cfg.model == "complete-graph") {
        rep = dense_spectrum(fv_generator_matrix(complete_graph_fv(cfg.cg)));
    } else {
        rep = tridiagonal_spectrum(birth_death_reduction(cfg.tp), invariant_pi(cfg.tp));
    }

    std::ostringstream csv;
    csv << "index,eigenvalue\n";
    for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i)
        csv << i << "," << format_double(rep.eigenvalues[i]) << "\n";
    const std::string out = cfg.out.empty() ? "spectrum.csv" : cfg.out;
    cmd_detail::write_file(out, csv.str());

    cmd_detail::json j;
    j["command"] = "spectrum";
    j["method"] = rep.method == SpectralMethod::tridiagonal ? "tridiagonal" : "dense";
    j["count"] = rep.eigenvalues.size();
    if (rep.gap) j["gap"] = *rep.gap;
    j["max_imag"] = rep.max_imag;
    j["out"] = out;
    cmd_detail::print_summary(j, clock.ms());
    return 0;
}

inline int cmd_verify(const std::string& scope, std::uint64_t seed, const std::string& out,
                      unsigned threads = 0) {
    VerifyContext ctx;
    ctx.seed = seed;
    ctx.threads = threads;
    if (!out.empty()) {
        const std::size_t slash = out.find_last_of('/');
        ctx.out_dir = slash == std::string::npos ? "." : out.substr(0, slash);
    }
    const std::vector<CheckResult> results = run_checks(ctx, scope);

    cmd_detail::json j;
    j["command"] = "verify";
    j["scope"] = scope;
    j["seed"] = seed;
    std::size_t failed = 0;
    cmd_detail::json checks = cmd_detail::json::array();
    for (const CheckResult& r : results) {
        cmd_detail::json c;
        c["id"] = r.id;
        c["verdict"] = r.pass ? "pass" : "fail";
        c["measured"] = r.measured;
        c["tolerance"] = r.tolerance;
        c["details"] = r.details;
        checks.push_back(c);
        if (!r.pass) ++failed;
    }
    j["checks"] = checks;
    j["failed"] = failed;
    j["all_pass"] = failed == 0;

    const std::string text = j.dump(2) + "\n";
    if (out.empty())
        std::cout << text;
    else {
        cmd_detail::write_file(out, text);
        std::cout << (failed == 0 ? "verify: all checks passed"
                                  : "verify: " + std::to_string(failed) + " check(s) failed")
                  << " (" << results.size() << " run, report " << out << ")\n";
    }
    return failed == 0 ? 0 : 1;
}

}  // namespace fvlab
