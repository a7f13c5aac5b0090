#include "pwcip/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace pwcip {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& val) {
    try {
        size_t pos = 0;
        const double v = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (...) {
        throw ConfigError("config key '" + key + "': cannot parse '" + val + "' as a number");
    }
}

int to_int(const std::string& key, const std::string& val) {
    const double v = to_double(key, val);
    if (v != static_cast<int>(v))
        throw ConfigError("config key '" + key + "': expected an integer, got '" + val + "'");
    return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& val) {
    if (val == "true" || val == "1" || val == "on") return true;
    if (val == "false" || val == "0" || val == "off") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + val + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& val) {
    std::vector<double> out;
    std::stringstream ss(val);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(key, item));
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

const std::set<std::string> kKnownKeys = {
    "medium.model", "medium.amplitude", "medium.window_inner", "medium.window_outer",
    "medium.n0", "medium.n00", "medium.X", "medium.monotone_z",
    "grid.n", "grid.X", "grid.h0", "grid.z_samples", "grid.t_samples",
    "horizon.alpha", "horizon.T1",
    "forward.T", "forward.r_trunc",
    "geodesics.ds",
    "solver.lambda", "solver.alpha", "solver.beta", "solver.w_r1", "solver.w_r2",
    "solver.sigma_smooth", "solver.max_iter", "solver.tol", "solver.lbfgs_m",
    "solver.init", "solver.M",
    "sweep.deltas", "sweep.noise_modes", "sweep.floor_subtract", "sweep.lambda_cap",
    "fdtd.T", "fdtd.eps", "fdtd.cfl", "fdtd.spacing",
    "regularity.fan_extent", "regularity.fan_per_axis", "regularity.s_max",
    "regularity.det_floor",
    "carleman.lambda_grid", "carleman.z_samples", "carleman.t_samples", "carleman.T1",
    "seed", "threads",
};

}  // namespace

void ExperimentConfig::validate() const {
    grid.validate();
    if (alpha > 0.0 && alpha > 2.0 / (3.0 * medium.n0) + 1e-12)
        throw ConfigError("horizon.alpha exceeds 2/(3 n0)");
    for (double d : sweep.deltas)
        if (d <= 0.0 || d >= 1.0)
            throw ConfigError("sweep.deltas entries must lie in (0, 1)");
    if (forward_T_eff() <= medium.n0)
        throw ConfigError("forward.T must exceed the travel-time bound n0");
    if (r_trunc < 0 || r_trunc > 2) throw ConfigError("forward.r_trunc must be 0, 1 or 2");
    if (threads < 1) throw ConfigError("threads must be >= 1");
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    // medium defaults match the shipped layered scenario
    cfg.medium = MediumSpec::layered(0.2);

    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!kKnownKeys.count(key))
            throw ConfigError("unknown config key '" + key + "'");
        kv[key] = val;
    }

    // medium block first: other defaults derive from its constants
    if (kv.count("medium.model")) {
        const std::string mdl = kv["medium.model"];
        if (mdl == "constant") cfg.medium = MediumSpec::constant();
        else if (mdl == "layered") cfg.medium = MediumSpec::layered(0.2);
        else if (mdl == "bump") cfg.medium = MediumSpec::bump(0.1);
        else throw ConfigError("config key 'medium.model': unknown model '" + mdl + "'");
    }
    const auto num = [&](const std::string& k, double& target) {
        if (kv.count(k)) target = to_double(k, kv[k]);
    };
    const auto inum = [&](const std::string& k, int& target) {
        if (kv.count(k)) target = to_int(k, kv[k]);
    };
    num("medium.amplitude", cfg.medium.amplitude);
    num("medium.window_inner", cfg.medium.window_inner);
    num("medium.window_outer", cfg.medium.window_outer);
    num("medium.n0", cfg.medium.n0);
    num("medium.n00", cfg.medium.n00);
    num("medium.X", cfg.medium.X);
    if (kv.count("medium.monotone_z"))
        cfg.medium.monotone_z = to_bool("medium.monotone_z", kv["medium.monotone_z"]);

    inum("grid.n", cfg.grid.n);
    num("grid.X", cfg.grid.X);
    num("grid.h0", cfg.grid.h0);
    inum("grid.z_samples", cfg.grid.z_samples);
    inum("grid.t_samples", cfg.grid.t_samples);

    num("horizon.alpha", cfg.alpha);
    num("horizon.T1", cfg.T1);
    num("forward.T", cfg.forward_T);
    inum("forward.r_trunc", cfg.r_trunc);
    num("geodesics.ds", cfg.geodesic_ds);

    num("solver.lambda", cfg.solver.lambda);
    num("solver.alpha", cfg.solver.alpha);
    num("solver.beta", cfg.solver.beta);
    num("solver.w_r1", cfg.solver.w_r1);
    num("solver.w_r2", cfg.solver.w_r2);
    num("solver.sigma_smooth", cfg.solver.sigma_smooth);
    inum("solver.max_iter", cfg.solver.max_iter);
    num("solver.tol", cfg.solver.tol);
    inum("solver.lbfgs_m", cfg.solver.lbfgs_m);
    if (kv.count("solver.init")) {
        const std::string ini = kv["solver.init"];
        if (ini == "flat") cfg.solver.init = SolverOptions::Init::Flat;
        else if (ini == "data-extension") cfg.solver.init = SolverOptions::Init::DataExtension;
        else throw ConfigError("config key 'solver.init': expected flat or data-extension");
    }

    if (kv.count("sweep.deltas")) cfg.sweep.deltas = to_list("sweep.deltas", kv["sweep.deltas"]);
    inum("sweep.noise_modes", cfg.sweep.noise_modes);
    if (kv.count("sweep.floor_subtract"))
        cfg.sweep.floor_subtract = to_bool("sweep.floor_subtract", kv["sweep.floor_subtract"]);
    num("sweep.lambda_cap", cfg.sweep.lambda_cap);

    num("fdtd.T", cfg.fdtd.T);
    num("fdtd.eps", cfg.fdtd.eps);
    num("fdtd.cfl", cfg.fdtd.cfl);
    num("fdtd.spacing", cfg.fdtd.spacing);

    num("regularity.fan_extent", cfg.regularity.fan_extent);
    inum("regularity.fan_per_axis", cfg.regularity.fan_per_axis);
    num("regularity.s_max", cfg.regularity.s_max);
    num("regularity.det_floor", cfg.regularity.det_floor);

    if (kv.count("carleman.lambda_grid"))
        cfg.carleman_lambda_grid = to_list("carleman.lambda_grid", kv["carleman.lambda_grid"]);
    inum("carleman.z_samples", cfg.carleman_z_samples);
    inum("carleman.t_samples", cfg.carleman_t_samples);
    num("carleman.T1", cfg.carleman_T1);

    if (kv.count("seed")) {
        try {
            cfg.seed = std::stoull(kv["seed"]);
        } catch (...) {
            throw ConfigError("config key 'seed': cannot parse '" + kv["seed"] + "'");
        }
    }
    inum("threads", cfg.threads);

    // a user-provided M cap lands in the admissible set through the lab layer
    if (kv.count("solver.M")) {
        const double M = to_double("solver.M", kv["solver.M"]);
        if (M <= 0.0) throw ConfigError("config key 'solver.M': must be positive");
        cfg.solver_M = M;
    }

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace pwcip
