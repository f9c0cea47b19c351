#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fvlab/harness/commands.hpp"

namespace {

struct CommonOpts {
    std::string config;
    std::string preset;
    std::string out;
    std::uint64_t seed = 0xF1E71;
};

void add_common(CLI::App* sub, CommonOpts& o) {
    sub->add_option("--config", o.config, "experiment config file (key = value lines)");
    sub->add_option("--preset", o.preset, "named two-point preset instead of a config file");
    sub->add_option("--seed", o.seed, "master seed override");
    sub->add_option("--out", o.out, "output file override");
}

fvlab::ExperimentConfig make_config(const CLI::App* sub, const CommonOpts& o) {
    if (!o.config.empty() && !o.preset.empty())
        throw std::runtime_error("--config and --preset are mutually exclusive");
    fvlab::ExperimentConfig cfg;
    if (!o.config.empty())
        cfg = fvlab::load_config(o.config);
    else if (!o.preset.empty())
        cfg = fvlab::preset_config(o.preset);
    else
        throw std::runtime_error("provide --config FILE or --preset NAME");
    if (sub->count("--seed")) cfg.seed = o.seed;
    if (sub->count("--out")) cfg.out = o.out;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"laboratory for interacting-particle approximations of absorbed Markov chains"};
    app.require_subcommand(1);

    CommonOpts sim_o, gap_o, corr_o, inv_o, spec_o;
    CLI::App* sim = app.add_subcommand("simulate", "exact event-driven trajectory of one replica");
    add_common(sim, sim_o);
    CLI::App* gap = app.add_subcommand("gap-curve",
                                       "spectral gap, bounds and rates across particle counts");
    add_common(gap, gap_o);
    CLI::App* corr = app.add_subcommand("correlations",
                                        "site-pair covariance: closed form vs Monte Carlo");
    add_common(corr, corr_o);
    CLI::App* inv = app.add_subcommand("invariant",
                                       "stationary law: closed form vs linear solve");
    add_common(inv, inv_o);
    CLI::App* spec = app.add_subcommand("spectrum", "spectrum of the configured generator");
    add_common(spec, spec_o);

    std::string scope = "all", verify_out;
    std::uint64_t verify_seed = 0xF1E71;
    CLI::App* ver = app.add_subcommand("verify", "run the closed-form verification checks");
    ver->add_option("--scope", scope, "all, engine, complete-graph or two-point");
    ver->add_option("--seed", verify_seed, "master seed for stochastic checks");
    ver->add_option("--out", verify_out, "write the JSON report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(sim)) return fvlab::cmd_simulate(make_config(sim, sim_o));
        if (app.got_subcommand(gap)) return fvlab::cmd_gap_curve(make_config(gap, gap_o));
        if (app.got_subcommand(corr)) return fvlab::cmd_correlations(make_config(corr, corr_o));
        if (app.got_subcommand(inv)) return fvlab::cmd_invariant(make_config(inv, inv_o));
        if (app.got_subcommand(spec)) return fvlab::cmd_spectrum(make_config(spec, spec_o));
        if (app.got_subcommand(ver)) return fvlab::cmd_verify(scope, verify_seed, verify_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
