#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vexp/errors.hpp"

namespace vexp {

/// Resolved experiment configuration. Flat key = value text with dotted
/// sections; unknown keys are rejected so manifests stay reproducible.
struct RunConfig {
    std::string instance = "paper-example";
    int grid_dim = 1;
    double grid_radius = 15.0;
    int grid_n = 301;
    double solver_tol = 1e-6;
    int solver_max_outer = 5000;
    int solver_path_points = 41;
    unsigned long long solver_seed = 42;
    std::string solver_variant = "plus"; // plus | minus | full
    double cone_eps = 1.0;
    std::vector<double> decay_radii = {10.0, 15.0, 20.0};
    std::vector<double> geometry_radii = {0.05, 0.1, 0.2, 0.5, 1.0};
    int geometry_samples = 32;
    std::vector<std::size_t> multiplicity_k_grid = {1, 4, 16};
    int multiplicity_restarts = 2;
    int multiplicity_samples = 64;
    int multiplicity_family_k = 2;
    std::vector<double> multiplicity_rho_grid = {0.5, 1, 2, 4, 8, 16, 32, 64};

    /// Every key in declaration order, for the manifest echo.
    std::vector<std::pair<std::string, std::string>> items() const {
        auto list_d = [](const std::vector<double>& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) s += ',';
                std::ostringstream os;
                os.precision(17);
                os << v[i];
                s += os.str();
            }
            return s;
        };
        auto list_k = [](const std::vector<std::size_t>& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) s += ',';
                s += std::to_string(v[i]);
            }
            return s;
        };
        auto num = [](double v) {
            std::ostringstream os;
            os.precision(17);
            os << v;
            return os.str();
        };
        return {
            {"instance", instance},
            {"grid.dim", std::to_string(grid_dim)},
            {"grid.radius", num(grid_radius)},
            {"grid.n", std::to_string(grid_n)},
            {"solver.tol", num(solver_tol)},
            {"solver.max_outer", std::to_string(solver_max_outer)},
            {"solver.path_points", std::to_string(solver_path_points)},
            {"solver.seed", std::to_string(solver_seed)},
            {"solver.variant", solver_variant},
            {"cone.eps", num(cone_eps)},
            {"decay.radii", list_d(decay_radii)},
            {"geometry.radii", list_d(geometry_radii)},
            {"geometry.samples", std::to_string(geometry_samples)},
            {"multiplicity.k_grid", list_k(multiplicity_k_grid)},
            {"multiplicity.restarts", std::to_string(multiplicity_restarts)},
            {"multiplicity.samples", std::to_string(multiplicity_samples)},
            {"multiplicity.family_k", std::to_string(multiplicity_family_k)},
            {"multiplicity.rho_grid", list_d(multiplicity_rho_grid)},
        };
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    }
}

inline long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
    }
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_double(key, trim(tok)));
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
}

} // namespace detail

/// key = value lines, '#' comments, blank lines ignored.
inline std::map<std::string, std::string> parse_config_text(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (kv.count(key)) throw ConfigError("duplicate key '" + key + "'");
        kv[key] = val;
    }
    return kv;
}

inline void validate_config(const RunConfig& c) {
    if (c.grid_dim != 1 && c.grid_dim != 2) throw ConfigError("key 'grid.dim': must be 1 or 2");
    if (!(c.grid_radius > 0.0)) throw ConfigError("key 'grid.radius': must be positive");
    if (c.grid_n < 3) throw ConfigError("key 'grid.n': must be at least 3");
    if (!(c.solver_tol > 0.0)) throw ConfigError("key 'solver.tol': must be positive");
    if (c.solver_max_outer < 1) throw ConfigError("key 'solver.max_outer': must be positive");
    if (c.solver_path_points < 3) throw ConfigError("key 'solver.path_points': must be >= 3");
    if (c.solver_variant != "plus" && c.solver_variant != "minus" && c.solver_variant != "full")
        throw ConfigError("key 'solver.variant': must be plus, minus or full");
    if (!(c.cone_eps > 0.0)) throw ConfigError("key 'cone.eps': must be positive");
    if (c.geometry_samples < 1) throw ConfigError("key 'geometry.samples': must be positive");
    if (c.multiplicity_restarts < 0) throw ConfigError("key 'multiplicity.restarts': must be >= 0");
    if (c.multiplicity_samples < 1) throw ConfigError("key 'multiplicity.samples': must be positive");
    if (c.multiplicity_family_k < 1) throw ConfigError("key 'multiplicity.family_k': must be positive");
    for (double r : c.decay_radii)
        if (!(r > 0.0)) throw ConfigError("key 'decay.radii': radii must be positive");
    for (double r : c.geometry_radii)
        if (!(r > 0.0)) throw ConfigError("key 'geometry.radii': radii must be positive");
    for (double r : c.multiplicity_rho_grid)
        if (!(r > 0.0)) throw ConfigError("key 'multiplicity.rho_grid': radii must be positive");
    for (std::size_t k : c.multiplicity_k_grid)
        if (k < 1) throw ConfigError("key 'multiplicity.k_grid': k must be >= 1");
}

inline RunConfig apply_config(const std::map<std::string, std::string>& kv) {
    RunConfig c;
    for (const auto& [key, val] : kv) {
        if (key == "instance") c.instance = val;
        else if (key == "grid.dim") c.grid_dim = static_cast<int>(detail::parse_int(key, val));
        else if (key == "grid.radius") c.grid_radius = detail::parse_double(key, val);
        else if (key == "grid.n") c.grid_n = static_cast<int>(detail::parse_int(key, val));
        else if (key == "solver.tol") c.solver_tol = detail::parse_double(key, val);
        else if (key == "solver.max_outer") c.solver_max_outer = static_cast<int>(detail::parse_int(key, val));
        else if (key == "solver.path_points") c.solver_path_points = static_cast<int>(detail::parse_int(key, val));
        else if (key == "solver.seed") c.solver_seed = static_cast<unsigned long long>(detail::parse_int(key, val));
        else if (key == "solver.variant") c.solver_variant = val;
        else if (key == "cone.eps") c.cone_eps = detail::parse_double(key, val);
        else if (key == "decay.radii") c.decay_radii = detail::parse_list(key, val);
        else if (key == "geometry.radii") c.geometry_radii = detail::parse_list(key, val);
        else if (key == "geometry.samples") c.geometry_samples = static_cast<int>(detail::parse_int(key, val));
        else if (key == "multiplicity.k_grid") {
            c.multiplicity_k_grid.clear();
            for (double d : detail::parse_list(key, val))
                c.multiplicity_k_grid.push_back(static_cast<std::size_t>(d));
        }
        else if (key == "multiplicity.restarts") c.multiplicity_restarts = static_cast<int>(detail::parse_int(key, val));
        else if (key == "multiplicity.samples") c.multiplicity_samples = static_cast<int>(detail::parse_int(key, val));
        else if (key == "multiplicity.family_k") c.multiplicity_family_k = static_cast<int>(detail::parse_int(key, val));
        else if (key == "multiplicity.rho_grid") c.multiplicity_rho_grid = detail::parse_list(key, val);
        else throw ConfigError("unknown key '" + key + "'");
    }
    validate_config(c);
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return apply_config(parse_config_text(in));
}

} // namespace vexp
