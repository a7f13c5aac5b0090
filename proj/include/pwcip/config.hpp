#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pwcip/carleman.hpp"
#include "pwcip/forward.hpp"
#include "pwcip/geodesics.hpp"
#include "pwcip/grid.hpp"
#include "pwcip/inversion.hpp"
#include "pwcip/medium.hpp"

namespace pwcip {

// ---------------------------------------------------------------------------
// Flat key-value experiment configuration with dotted sections. Unknown keys
// and malformed values raise ConfigError naming the offending key.
// ---------------------------------------------------------------------------

struct SweepConfig {
    std::vector<double> deltas{1e-1, 1e-2, 1e-3, 1e-4};
    int noise_modes = 3;
    bool floor_subtract = true;
    double lambda_cap = 10.0;
};

struct FdtdConfigDefaults {
    double T = 1.7;
    double eps = 0.06;
    double cfl = 0.45;
    double spacing = 0.0625;
};

struct RegularityConfig {
    double fan_extent = -1.0;  // < 0: 0.8 X
    int fan_per_axis = 7;
    double s_max = -1.0;       // < 0: n0
    double det_floor = 0.25;
};

struct ExperimentConfig {
    MediumSpec medium;
    GridSpec grid;
    double alpha = -1.0;       // < 0: 2 / (3 n0)
    double T1 = -1.0;          // < 0: 3 / alpha
    double forward_T = -1.0;   // < 0: T1 + n0
    int r_trunc = 2;
    double geodesic_ds = 1e-3;
    SolverOptions solver;
    double solver_M = 5.0;  // node-value cap of the admissible set
    SweepConfig sweep;
    FdtdConfigDefaults fdtd;
    RegularityConfig regularity;
    std::vector<double> carleman_lambda_grid{5.0, 10.0, 20.0, 40.0};
    int carleman_z_samples = 161;
    int carleman_t_samples = 241;
    double carleman_T1 = 3.0;
    uint64_t seed = 1234;
    int threads = 1;

    double alpha_eff() const { return alpha > 0.0 ? alpha : 2.0 / (3.0 * medium.n0); }
    double T1_eff() const { return T1 > 0.0 ? T1 : 3.0 / alpha_eff(); }
    double forward_T_eff() const { return forward_T > 0.0 ? forward_T : T1_eff() + medium.n0; }

    // grid with the experiment horizons applied; the stability window 1/alpha
    // is clamped when a shortened horizon is requested
    GridSpec horizon_grid() const {
        GridSpec g = grid;
        g.T1 = T1_eff();
        g.t1 = std::min(1.0 / alpha_eff(), g.T1);
        return g;
    }

    void validate() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace pwcip
