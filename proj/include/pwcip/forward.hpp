#pragma once

#include <vector>

#include "pwcip/geodesics.hpp"
#include "pwcip/grid.hpp"
#include "pwcip/medium.hpp"

namespace pwcip {

// ---------------------------------------------------------------------------
// Forward data generation by two independent routes, and the reduction of the
// boundary measurements to the nonlocal system's unknowns:
//   u --(time integral)--> v --(shift to front-relative time)--> P --(d/dt)--> w
// with boundary data (g0, g1, g2) derived from the measured traces
// (f0, f1, f2).
//
// The optics route expands u behind the wavefront as
//   u = sum_k alpha_k(x) (t - tau(x))^k / k!  for t >= tau(x)
// and is exact at the front; the time-domain solver cross-validates it.
// ---------------------------------------------------------------------------

enum class Provenance { Optics, Fdtd };

struct WaveField {
    GridSpec grid;
    double T = 0.0;      // time horizon of the samples
    int nt = 0;          // samples on [0, T]
    double eps = 0.0;    // source mollification width (0 for optics)
    Provenance provenance = Provenance::Optics;
    SemiDiscreteField u;  // (i, j, k, l); l on the field's own t-grid

    // optics payload: front and expansion coefficients for exact transforms
    bool has_expansion = false;
    SemiDiscreteField tau;
    std::vector<SemiDiscreteField> alphas;  // alpha_0 .. alpha_r

    // time-domain payload: normal-derivative trace at z=0 from the solver grid
    bool has_uz_trace = false;
    GammaTrace uz_gamma;
    double energy_drift = 0.0;

    double wave_dt() const { return T / (nt - 1); }
    double wave_t(int l) const { return l * wave_dt(); }
};

// measured data: traces of u and u_z at z=0 and of u on the lateral faces,
// on the wave field's own time grid over (0, T)
struct CipData {
    GridSpec grid;
    double T = 0.0;
    int nt = 0;
    GammaTrace f0, f1;
    ThetaTrace f2;
};

struct TransformedData {
    GridSpec grid;           // grid.T1 = T - n0
    SemiDiscreteField w;     // on (0, T1)
    GammaTrace g0, g1;       // boundary data at z = 0
    ThetaTrace g2;           // lateral boundary data
    ThetaTrace tau_theta;    // static lateral trace of tau (z for compliant media)
    double A_floor = 0.0;    // admissibility floor carried along with the data
};

WaveField optics_forward(const MediumSpec& m, const GridSpec& g, const TravelTimeField& tt,
                         const AmplitudeField& amp, double T, int nt_wave = 0);

struct FdtdOptions {
    double T = 1.6;
    double eps = 0.06;       // source mollification width (>= 3 dt enforced)
    double cfl = 0.45;       // must be <= 0.5
    double spacing = 0.0625; // cartesian solver step
    double pad = -1.0;       // box padding; < 0 means T/2 + safety
    size_t budget_cap = 300000000;  // nodes x steps guard
};

WaveField fdtd_forward(const MediumSpec& m, const GridSpec& g, const FdtdOptions& opts);

CipData extract_cip_data(const WaveField& field);

// HorizonTooShort unless T > n0. The wave field supplies the interior values
// of w; the extracted traces supply the boundary data.
TransformedData transform_chain(const MediumSpec& m, const WaveField& wave, const CipData& cip,
                                const TravelTimeField& tt, double T);

// discrete smoothing of a z=0 trace with the solver's effective source kernel
// (two mollifiers convolved); used when comparing the two routes
GammaTrace mollify_trace(const GammaTrace& tr, double eps);

// detected front arrival per node: first time the trace crosses half of its
// local plateau; plateau sampled a few widths behind the crossing
struct FrontProbe {
    int i, j, k;
    double arrival;
    double plateau;
};
std::vector<FrontProbe> detect_fronts(const WaveField& field, double z_min = 0.2,
                                      double z_max = 0.95);

}  // namespace pwcip
