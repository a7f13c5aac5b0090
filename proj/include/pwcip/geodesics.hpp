#pragma once

#include <vector>

#include "pwcip/grid.hpp"
#include "pwcip/medium.hpp"
#include "pwcip/types.hpp"

namespace pwcip {

// ---------------------------------------------------------------------------
// Rays of the metric d(tau) = n |dx| launched orthogonally from the source
// plane z = 0, the travel-time field obtained by inverting the shooting map,
// the Hessian of tau transported along rays, and the leading wave amplitude
// with its lower bound.
// ---------------------------------------------------------------------------

struct RayNode {
    double s;   // arc parameter; equals tau along the ray
    Vec3 x;
    Vec3 p;     // momentum; |p|^2 = n^2(x) up to integrator tolerance
};

struct GeodesicPath {
    double a = 0.0, b = 0.0;  // launch point (a, b, 0) on the source plane
    double ds = 1e-3;
    std::vector<RayNode> nodes;
    double eikonal_defect = 0.0;  // max | |p|^2 - n^2 | along the path
    // the travel time carried by the arc parameter must agree with the
    // Euclidean-length integral of n along the same path; the discrepancy is
    // reported, not reconciled
    double tau_sigma_defect = 0.0;
};

struct CurvatureState {
    double s;
    Mat3 kappa;         // Hessian of tau transported along the ray
    double trace_rate;  // d(tr kappa)/ds evaluated from the transport equation
};

struct TravelTimeField {
    SemiDiscreteField tau;       // static
    SemiDiscreteField dz_tau;    // ray-exact dz tau (momentum z-component)
    std::array<SemiDiscreteField, 3> grad;  // ray-exact gradient = momentum
    SemiDiscreteField origin_a, origin_b;   // shooting solution per node
};

struct AmplitudeField {
    SemiDiscreteField A;
    double A0 = 0.0;                      // floor exp(-3 n00^2 n0^2 / 2) / 2
    double min_A = 0.0;
    bool floor_ok = true;
    double max_trace_rate = 0.0;          // over all per-node transport runs
    std::vector<SemiDiscreteField> alphas;  // higher-order coefficients, 1..r
};

struct ShootingOptions {
    double ds = 1e-3;
    double tol_factor = 1e-8;   // convergence when |xi - node| < tol_factor * X
    int max_iter = 25;
    double fd_delta = 1e-5;     // ray-bundle differencing step
    double defect_tol = 1e-8;
    double kappa_cap = 1e3;     // curvature blowup guard
    int threads = 1;
};

struct RegularityReport {
    bool pass = true;
    double min_det = 1.0;       // min |det d(xi)/d(s, a, b)| over the fan
    double det_floor = 0.25;
    Vec3 worst_x0;
    double worst_s = 0.0;
    int rays = 0;
    std::string note;
};

double amplitude_floor(double n0, double n00);

GeodesicPath trace_geodesic(const MediumSpec& m, double a, double b, double s_max,
                            double ds = 1e-3, double defect_tol = 1e-8);

std::vector<CurvatureState> transport_curvature(const MediumSpec& m, const GeodesicPath& path,
                                                double kappa_cap = 1e3);

TravelTimeField travel_time_field(const MediumSpec& m, const GridSpec& g,
                                  const ShootingOptions& opts = {});

AmplitudeField amplitude_field(const MediumSpec& m, const GridSpec& g,
                               const TravelTimeField& tt, const ShootingOptions& opts = {});

// alpha_k for k = 1..r_trunc appended to amp.alphas; each solves the
// transport recursion driven by the discrete Laplacian of the previous one
void higher_amplitudes(const MediumSpec& m, const GridSpec& g, const TravelTimeField& tt,
                       AmplitudeField& amp, int r_trunc, const ShootingOptions& opts = {});

RegularityReport check_regularity(const MediumSpec& m, double fan_extent, int fan_per_axis,
                                  double s_max, const ShootingOptions& opts = {},
                                  double det_floor = 0.25);

// max over a fan of rays of the curvature trace rate (tested against the
// 6 n00^2 bound)
double max_trace_rate_over_fan(const MediumSpec& m, double fan_extent, int fan_per_axis,
                               double s_max, const ShootingOptions& opts = {});

}  // namespace pwcip
