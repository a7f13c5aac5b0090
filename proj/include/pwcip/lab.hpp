#pragma once

#include <string>
#include <vector>

#include "pwcip/config.hpp"
#include "pwcip/noise.hpp"

namespace pwcip {

// ---------------------------------------------------------------------------
// Experiment drivers: each one orchestrates a verification or reconstruction
// scenario from an ExperimentConfig and persists CSV/JSON/binary artifacts to
// an output directory. Identical config and seed produce byte-identical
// outputs.
// ---------------------------------------------------------------------------

struct PipelineData {
    GridSpec grid;           // horizons applied
    TravelTimeField tt;
    AmplitudeField amp;
    TransformedData data;    // clean reduced data (exact transform route)
    double T = 0.0;
};

// forward model up to the reduced data, shared by the drivers
PipelineData build_pipeline(const ExperimentConfig& cfg);

struct GeodesicLabReport {
    double max_trace_rate = 0.0;
    double trace_rate_bound = 0.0;  // 6 n00^2
    double min_A = 0.0, A0 = 0.0;
    double eikonal_defect = 0.0;
    int fan_rays = 0;
    RegularityReport regularity;
    bool medium_valid = false;
};

GeodesicLabReport run_geodesic_report(const ExperimentConfig& cfg, const std::string& out_dir);

struct CrosscheckReport {
    int probes = 0;
    int arrival_hits = 0;
    int amplitude_hits = 0;
    double arrival_tol = 0.0;
    double route_l2_rel = 0.0;
    double energy_drift = 0.0;
};

CrosscheckReport run_forward_crosscheck(const ExperimentConfig& cfg, const std::string& out_dir);

struct CarlemanLabReport {
    VerifyReport c4, c6;
};

CarlemanLabReport run_carleman_report(const ExperimentConfig& cfg, const std::string& out_dir);

struct InversionRunReport {
    double delta = 0.0;         // 0 for the noiseless run
    double lambda = 0.0;
    double J = 0.0;
    int iterations = 0;
    SolveStatus status = SolveStatus::Converged;
    double err_w = 0.0;         // windowed H1 distance of w to the truth
    double err_tau = 0.0;       // H1 distance of tau to the truth
    double err_n = 0.0;         // L2 distance of n to the discrete truth
    double err_n_medium = 0.0;  // L2 distance of n to the analytic profile
    double seconds = 0.0;
};

InversionRunReport run_invert(const ExperimentConfig& cfg, const std::string& out_dir,
                              double delta = 0.0, uint64_t seed_override = 0,
                              const PipelineData* pre = nullptr,
                              const std::string& tag = "");

// Per-level entry: the primary errors are distances between the noisy and
// clean reconstructions at identical solver settings (two solutions whose
// boundary data differ by less than delta, exactly the stability law's
// setup); truth-relative errors with the same-settings clean run as the
// subtracted floor ship alongside as diagnostics.
struct StabilityRecord {
    double delta = 0.0;
    double bound = 0.0;  // delta^(1/3) ln(1/delta)
    double lambda = 0.0;
    double err_w = 0.0, err_tau = 0.0, err_n = 0.0;  // noisy vs clean solution
    double truth_err_n = 0.0;                        // noisy vs truth
    double clean_err_n = 0.0;                        // clean vs truth (the floor)
    double sub_n = 0.0;                              // floor-subtracted diagnostic
    int iterations = 0;
    double J = 0.0;
};

struct SweepReport {
    std::vector<StabilityRecord> records;  // descending delta
    double slope = 0.0, intercept = 0.0;   // fit of log(err_n) vs log(bound)
    double C2_lsq = 0.0, C2_max = 0.0;
    bool monotone = false;
    bool below_curve = false;
};

SweepReport run_stability_sweep(const ExperimentConfig& cfg, const std::string& out_dir);

// validate-medium driver: writes the report, returns overall pass
bool run_validate_medium(const ExperimentConfig& cfg, const std::string& out_dir);

// forward driver: writes reduced data artifacts (and the crosscheck when asked)
void run_forward_products(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace pwcip
