#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fvlab/complete_graph.hpp"
#include "fvlab/two_point.hpp"

namespace fvlab {

// One experiment: a model pack with its parameters plus the run controls
// shared by every subcommand. Parsed from `key = value` lines.
struct ExperimentConfig {
    std::string model;  // "complete-graph" or "two-point"
    CompleteGraphParams cg;
    TwoPointParams tp;
    std::uint64_t seed = 0xF1E71;
    std::size_t replicas = 2000;
    double horizon = 1.0;
    std::vector<int> n_grid;
    std::vector<double> t_grid;
    std::vector<int> eta0;  // empty = all particles on site 1
    std::string out;

    // Equality of the experiment being described: only the active model's
    // parameter block participates.
    bool operator==(const ExperimentConfig& o) const {
        if (model != o.model || seed != o.seed || replicas != o.replicas ||
            horizon != o.horizon || n_grid != o.n_grid || t_grid != o.t_grid ||
            eta0 != o.eta0 || out != o.out)
            return false;
        if (model == "two-point")
            return tp.jump_12 == o.tp.jump_12 && tp.jump_21 == o.tp.jump_21 &&
                   tp.kill_1 == o.tp.kill_1 && tp.kill_2 == o.tp.kill_2 &&
                   tp.particles == o.tp.particles;
        return cg.sites == o.cg.sites && cg.kill == o.cg.kill && cg.particles == o.cg.particles;
    }

    int particles() const { return model == "two-point" ? tp.particles : cg.particles; }

    FvModel fv_model() const {
        if (model == "two-point") return two_point_fv(tp);
        if (model == "complete-graph") return complete_graph_fv(cg);
        throw std::runtime_error("config: unknown model '" + model + "'");
    }

    Configuration start_configuration() const {
        const int k = model == "two-point" ? 2 : cg.sites;
        const int n = particles();
        if (eta0.empty()) {
            Configuration c{std::vector<int>(k, 0)};
            c.counts[0] = n;
            return c;
        }
        Configuration c{eta0};
        if (static_cast<int>(eta0.size()) != k) throw std::runtime_error("config: eta0 length mismatch");
        validate_configuration(c, n);
        return c;
    }
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& value, Parse parse) {
    std::vector<T> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse(item));
    }
    return out;
}

[[noreturn]] inline void config_error(int line, const std::string& what) {
    throw std::runtime_error("config line " + std::to_string(line) + ": " + what);
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    bool saw_model = false;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) detail::config_error(lineno, "expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        try {
            if (key == "model") {
                if (value != "complete-graph" && value != "two-point")
                    detail::config_error(lineno, "unknown model '" + value + "'");
                cfg.model = value;
                saw_model = true;
            } else if (key == "sites") {
                cfg.cg.sites = std::stoi(value);
            } else if (key == "kill") {
                cfg.cg.kill = std::stod(value);
            } else if (key == "particles") {
                cfg.cg.particles = std::stoi(value);
                cfg.tp.particles = cfg.cg.particles;
            } else if (key == "jump12") {
                cfg.tp.jump_12 = std::stod(value);
            } else if (key == "jump21") {
                cfg.tp.jump_21 = std::stod(value);
            } else if (key == "kill1") {
                cfg.tp.kill_1 = std::stod(value);
            } else if (key == "kill2") {
                cfg.tp.kill_2 = std::stod(value);
            } else if (key == "seed") {
                cfg.seed = std::stoull(value, nullptr, 0);
            } else if (key == "replicas") {
                cfg.replicas = std::stoull(value);
            } else if (key == "horizon") {
                cfg.horizon = std::stod(value);
            } else if (key == "out") {
                cfg.out = value;
            } else if (key == "n_grid") {
                cfg.n_grid = detail::parse_list<int>(value, [](const std::string& s) {
                    return std::stoi(s);
                });
            } else if (key == "t_grid") {
                cfg.t_grid = detail::parse_list<double>(value, [](const std::string& s) {
                    return std::stod(s);
                });
            } else if (key == "eta0") {
                cfg.eta0 = detail::parse_list<int>(value, [](const std::string& s) {
                    return std::stoi(s);
                });
            } else {
                detail::config_error(lineno, "unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            detail::config_error(lineno, "cannot parse value '" + value + "' for " + key);
        } catch (const std::out_of_range&) {
            detail::config_error(lineno, "value out of range: '" + value + "'");
        }
    }
    if (!saw_model) throw std::runtime_error("config: missing 'model' key");
    if (!std::is_sorted(cfg.n_grid.begin(), cfg.n_grid.end()))
        throw std::runtime_error("config: n_grid must be sorted");
    if (!std::is_sorted(cfg.t_grid.begin(), cfg.t_grid.end()))
        throw std::runtime_error("config: t_grid must be sorted");
    if (cfg.model == "complete-graph")
        validate_params(cfg.cg);
    else
        validate_params(cfg.tp);
    return cfg;
}

inline std::string emit_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "model = " << cfg.model << "\n";
    if (cfg.model == "complete-graph") {
        out << "sites = " << cfg.cg.sites << "\n";
        out << "kill = " << format_double(cfg.cg.kill) << "\n";
        out << "particles = " << cfg.cg.particles << "\n";
    } else {
        out << "jump12 = " << format_double(cfg.tp.jump_12) << "\n";
        out << "jump21 = " << format_double(cfg.tp.jump_21) << "\n";
        out << "kill1 = " << format_double(cfg.tp.kill_1) << "\n";
        out << "kill2 = " << format_double(cfg.tp.kill_2) << "\n";
        out << "particles = " << cfg.tp.particles << "\n";
    }
    out << "seed = " << cfg.seed << "\n";
    out << "replicas = " << cfg.replicas << "\n";
    out << "horizon = " << format_double(cfg.horizon) << "\n";
    auto list_line = [&out](const char* key, const auto& values, auto fmt) {
        if (values.empty()) return;
        out << key << " = ";
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out << ",";
            out << fmt(values[i]);
        }
        out << "\n";
    };
    list_line("n_grid", cfg.n_grid, [](int v) { return std::to_string(v); });
    list_line("t_grid", cfg.t_grid, [](double v) { return format_double(v); });
    list_line("eta0", cfg.eta0, [](int v) { return std::to_string(v); });
    if (!cfg.out.empty()) out << "out = " << cfg.out << "\n";
    return out.str();
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

// Representative parameter sets for the four qualitative gap-curve regimes,
// plus the degenerate constant-kill case where every rate collapses to a + b.
inline ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig cfg;
    cfg.model = "two-point";
    for (int n = 2; n <= 60; n += 2) cfg.n_grid.push_back(n);
    auto set = [&cfg](double a, double b, double p1, double p2) {
        cfg.tp.jump_12 = a;
        cfg.tp.jump_21 = b;
        cfg.tp.kill_1 = p1;
        cfg.tp.kill_2 = p2;
    };
    if (name == "regime-i") {
        set(1.0, 1.0, 0.0, 1.0);
    } else if (name == "regime-ii") {
        set(1.0, 1.0, 2.0, 3.0);
    } else if (name == "regime-iii") {
        set(0.2, 1.0, 2.0, 1.0);
    } else if (name == "regime-iv") {
        set(1.0, 1.0, 0.05, 0.1);
    } else if (name == "constant-p0") {
        set(1.0, 1.0, 0.75, 0.75);
    } else {
        throw std::runtime_error("unknown preset '" + name + "'");
    }
    return cfg;
}

}  // namespace fvlab
