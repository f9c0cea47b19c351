#include <catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fvlab/harness/commands.hpp"
#include "fvlab/harness/config.hpp"
#include "fvlab/harness/verify.hpp"

using namespace fvlab;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct FileGuard {
    std::string path;
    ~FileGuard() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("config round trip preserves every field") {
    ExperimentConfig cfg;
    cfg.model = "two-point";
    cfg.tp = TwoPointParams{0.31, 1.7, 0.0, 2.25, 14};
    cfg.seed = 0xABCDEF;
    cfg.replicas = 512;
    cfg.horizon = 3.5;
    cfg.n_grid = {2, 8, 32};
    cfg.t_grid = {0.1, 0.5, 2.0};
    cfg.eta0 = {5, 9};
    cfg.out = "somewhere.csv";
    CHECK(parse_config(emit_config(cfg)) == cfg);

    ExperimentConfig cg;
    cg.model = "complete-graph";
    cg.cg = CompleteGraphParams{3, 1.0 / 3.0, 21};
    cg.cg.particles = 21;
    CHECK(parse_config(emit_config(cg)) == cg);
}

TEST_CASE("config parser diagnoses bad input") {
    CHECK_THROWS_WITH(parse_config("sites = 3\n"), Catch::Matchers::ContainsSubstring("model"));
    CHECK_THROWS_WITH(parse_config("model = complete-graph\nwibble = 1\n"),
                      Catch::Matchers::ContainsSubstring("line 2"));
    CHECK_THROWS_WITH(parse_config("model = complete-graph\nkill = fast\n"),
                      Catch::Matchers::ContainsSubstring("line 2"));
    CHECK_THROWS_WITH(parse_config("model = two-point\nkill1 = 1\nn_grid = 9,3\n"),
                      Catch::Matchers::ContainsSubstring("sorted"));
    CHECK_THROWS_AS(parse_config("model = neither\n"), std::runtime_error);

    // Comments and blank lines are tolerated.
    const ExperimentConfig ok = parse_config(
        "# experiment\nmodel = complete-graph\nsites = 3\nkill = 0.5\n\nparticles = 7 # N\n");
    CHECK(ok.cg.sites == 3);
    CHECK(ok.cg.particles == 7);
}

TEST_CASE("config files load from disk") {
    const std::string path = "test_config_tmp.cfg";
    FileGuard guard{path};
    {
        std::ofstream out(path);
        out << "model = two-point\njump12 = 0.25\nkill2 = 1.5\nparticles = 9\n";
    }
    const ExperimentConfig cfg = load_config(path);
    CHECK(cfg.model == "two-point");
    CHECK(cfg.tp.jump_12 == 0.25);
    CHECK(cfg.tp.kill_2 == 1.5);
    CHECK(cfg.tp.particles == 9);
    CHECK_THROWS_AS(load_config("no_such_file.cfg"), std::runtime_error);
}

TEST_CASE("presets cover the documented regimes") {
    for (const char* name : {"regime-i", "regime-ii", "regime-iii", "regime-iv", "constant-p0"}) {
        const ExperimentConfig cfg = preset_config(name);
        CHECK(cfg.model == "two-point");
        CHECK(!cfg.n_grid.empty());
        validate_params(cfg.tp);
    }
    CHECK(preset_config("regime-iii").tp.jump_12 == 0.2);
    CHECK(preset_config("constant-p0").tp.kill_1 == preset_config("constant-p0").tp.kill_2);
    CHECK_THROWS_AS(preset_config("regime-x"), std::runtime_error);
}

TEST_CASE("verification registry is complete and scoped") {
    CHECK_NOTHROW(assert_registry_complete());
    CHECK(verify_registry().size() == 16);
    VerifyContext ctx;
    CHECK_THROWS_AS(run_checks(ctx, "everything"), std::runtime_error);
    std::size_t cg = 0, tp = 0, engine = 0;
    for (const VerifyCheck& c : verify_registry()) {
        if (std::string(c.scope) == "complete-graph") ++cg;
        if (std::string(c.scope) == "two-point") ++tp;
        if (std::string(c.scope) == "engine") ++engine;
    }
    CHECK(cg == 8);
    CHECK(tp == 7);
    CHECK(engine == 1);
}

TEST_CASE("trajectory export is byte-deterministic in the seed") {
    ExperimentConfig cfg;
    cfg.model = "complete-graph";
    cfg.cg = CompleteGraphParams{3, 1.0, 10};
    cfg.seed = 5;
    cfg.horizon = 1.0;

    FileGuard g1{"traj_a.csv"}, g2{"traj_b.csv"}, g3{"traj_c.csv"};
    cfg.out = g1.path;
    REQUIRE(cmd_simulate(cfg) == 0);
    cfg.out = g2.path;
    REQUIRE(cmd_simulate(cfg) == 0);
    cfg.out = g3.path;
    cfg.seed = 6;
    REQUIRE(cmd_simulate(cfg) == 0);

    const std::string a = slurp(g1.path);
    CHECK(a == slurp(g2.path));
    CHECK(a != slurp(g3.path));
    CHECK(a.rfind("time,site_from,site_to,cause\n", 0) == 0);
    CHECK(a.find("mutation") != std::string::npos);
}

TEST_CASE("gap curve export uses the documented header") {
    ExperimentConfig cfg = preset_config("regime-i");
    cfg.n_grid = {2, 4, 6};
    FileGuard g{"gap_tmp.csv"};
    cfg.out = g.path;
    REQUIRE(cmd_gap_curve(cfg) == 0);
    const std::string text = slurp(g.path);
    CHECK(text.rfind("N,lambda_cond,rho,lambda_N,hardy_lower,lambda_u_best\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);

    ExperimentConfig bad;
    bad.model = "complete-graph";
    CHECK_THROWS_AS(cmd_gap_curve(bad), std::runtime_error);
}

TEST_CASE("correlation table stays within Monte Carlo error") {
    ExperimentConfig cfg;
    cfg.model = "complete-graph";
    cfg.cg = CompleteGraphParams{2, 1.0, 6};
    cfg.seed = 12;
    cfg.replicas = 4000;
    cfg.t_grid = {0.5, 1.0};
    const auto rows = correlations_table(cfg);
    REQUIRE(rows.size() == 2);
    for (const CorrelationRow& row : rows) {
        CHECK(!row.has_bound);
        CHECK(std::abs(row.analytic - row.mc) <= 5.0 * row.mc_stderr);
    }

    ExperimentConfig tp;
    tp.model = "two-point";
    tp.tp = TwoPointParams{1.0, 1.5, 0.5, 1.0, 8};
    tp.seed = 12;
    tp.replicas = 4000;
    tp.t_grid = {0.5, 1.5};
    const auto tp_rows = correlations_table(tp);
    for (const CorrelationRow& row : tp_rows) {
        CHECK(row.has_bound);
        CHECK(std::abs(row.analytic - row.mc) <= 5.0 * row.mc_stderr);
        CHECK(std::abs(row.analytic) <= row.bound);
    }
}

TEST_CASE("invariant and spectrum exports") {
    ExperimentConfig cfg;
    cfg.model = "two-point";
    cfg.tp = TwoPointParams{1.0, 0.7, 0.9, 0.2, 6};
    FileGuard g1{"inv_tmp.csv"}, g2{"spec_tmp.csv"};
    cfg.out = g1.path;
    REQUIRE(cmd_invariant(cfg) == 0);
    const std::string inv = slurp(g1.path);
    CHECK(inv.rfind("state,closed_form,linear_solve\n", 0) == 0);
    CHECK(inv.find("6|0") != std::string::npos);

    cfg.out = g2.path;
    REQUIRE(cmd_spectrum(cfg) == 0);
    const std::string eig = slurp(g2.path);
    CHECK(eig.rfind("index,eigenvalue\n", 0) == 0);
    CHECK(std::count(eig.begin(), eig.end(), '\n') == 8);
}

TEST_CASE("verify command writes a structured report") {
    FileGuard g{"verify_engine_tmp.json"};
    const int rc = cmd_verify("engine", 0xF1E71, g.path);
    const nlohmann::json j = nlohmann::json::parse(slurp(g.path));
    CHECK(j.at("command") == "verify");
    CHECK(j.at("scope") == "engine");
    REQUIRE(j.at("checks").size() == 1);
    const auto& c = j.at("checks")[0];
    CHECK(c.at("id") == "fv-ssa-correctness");
    CHECK(c.contains("measured"));
    CHECK(c.contains("tolerance"));
    CHECK(c.at("verdict") == "pass");
    CHECK(rc == 0);
}
