// Acceptance suite: runs every criterion end to end and prints one pass/fail
// line per criterion. Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pwcip/io.hpp"
#include "pwcip/lab.hpp"

using namespace pwcip;

namespace {

struct Criterion {
    int id;
    std::string label;
    bool pass;
    std::string detail;
};

std::vector<Criterion> g_results;

void record(int id, const std::string& label, bool pass, const std::string& detail) {
    g_results.push_back({id, label, pass, detail});
    std::printf("criterion %02d %-4s %-38s %s\n", id, pass ? "PASS" : "FAIL", label.c_str(),
                detail.c_str());
    std::fflush(stdout);
}

double now_seconds(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

ExperimentConfig base_config(const std::string& model, double amplitude) {
    std::ostringstream ss;
    ss << "medium.model = " << model << "\n";
    ss << "medium.amplitude = " << amplitude << "\n";
    ss << "seed = 1234\n";
    return parse_config_text(ss.str());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --- criteria ------------------------------------------------------------------

void criterion_1_constant_exactness() {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentConfig cfg = base_config("constant", 0.0);
    const PipelineData pd = build_pipeline(cfg);
    double worst_tau = 0.0, worst_a = 0.0, worst_w = 0.0;
    for (int i = 0; i < pd.tt.tau.ni; ++i)
        for (int j = 0; j < pd.tt.tau.nj; ++j)
            for (int k = 0; k < pd.tt.tau.nz; ++k) {
                worst_tau = std::max(worst_tau,
                                     std::abs(pd.tt.tau.at(i, j, k) - pd.grid.z(k)));
                worst_a = std::max(worst_a, std::abs(pd.amp.A.at(i, j, k) - 0.5));
                for (int l = 0; l < pd.data.w.nt; ++l)
                    worst_w = std::max(worst_w, std::abs(pd.data.w.at(i, j, k, l) - 0.5));
            }
    const double secs = now_seconds(t0);
    const bool pass = worst_tau <= 1e-10 && worst_a <= 1e-12 && worst_w <= 1e-8 && secs < 5.0;
    record(1, "constant-medium exactness", pass,
           "tau " + fmt(worst_tau) + ", A " + fmt(worst_a) + ", w " + fmt(worst_w) + ", " +
               fmt(secs) + "s");
}

void criterion_2_layered_oracles() {
    const MediumSpec m = MediumSpec::layered(0.2);
    GridSpec g;
    const TravelTimeField tt = travel_time_field(m, g);
    const double tau_top = tt.tau.at(4, 4, g.z_samples - 1);
    const double tau_oracle = oracle::layered_tau(m, 1.0);
    const double err_tau = std::abs(tau_top - tau_oracle);
    const double err_11 = std::abs(tau_top - 1.1);

    const AmplitudeField amp = amplitude_field(m, g, tt);
    const auto rc = oracle::layered_riccati(m, tau_top);
    const double a_oracle = 0.5 * std::exp(-0.5 * rc.amp_int);
    const double err_a = std::abs(amp.A.at(4, 4, g.z_samples - 1) - a_oracle);

    const bool pass = err_tau <= 1e-6 && err_11 <= 1e-6 && err_a <= 1e-6;
    record(2, "layered-medium oracles", pass,
           "tau err " + fmt(err_tau) + " (vs 1.1: " + fmt(err_11) + "), A err " + fmt(err_a));
}

void criterion_3_curvature_rate_bound() {
    int rays = 0;
    bool pass = true;
    double worst_margin = -1e300;
    std::string worst;
    for (const MediumSpec& m : {MediumSpec::constant(), MediumSpec::layered(0.2),
                                MediumSpec::bump(0.1), MediumSpec::bump(0.05)}) {
        const double rate = max_trace_rate_over_fan(m, 0.9, 18, m.n0);
        rays += 18 * 18;
        const double bound = 6.0 * m.n00 * m.n00;
        if (rate > bound + 1e-6) pass = false;
        if (rate - bound > worst_margin) {
            worst_margin = rate - bound;
            worst = m.model_name() + ": rate " + fmt(rate) + " vs bound " + fmt(bound);
        }
    }
    pass = pass && rays >= 1000;
    record(3, "curvature trace-rate envelope", pass,
           std::to_string(rays) + " rays, worst " + worst);
}

void criterion_4_amplitude_floor() {
    const double floor_ref = amplitude_floor(1.2, 1.5);
    // formula value is 3.8754e-3; the printed reference rounds to ~3.87e-3
    bool pass = std::abs(floor_ref - 0.5 * std::exp(-4.86)) <= 1e-15 &&
                std::abs(floor_ref - 3.871e-3) <= 1e-5;
    std::string detail = "floor(1.2,1.5) = " + fmt(floor_ref);
    for (const MediumSpec& m :
         {MediumSpec::constant(), MediumSpec::layered(0.2), MediumSpec::bump(0.1)}) {
        GridSpec g;
        const TravelTimeField tt = travel_time_field(m, g);
        const AmplitudeField amp = amplitude_field(m, g, tt);
        if (!amp.floor_ok) pass = false;
        detail += "; " + m.model_name() + " min A " + fmt(amp.min_A) + " >= " + fmt(amp.A0);
    }
    record(4, "amplitude lower bound", pass, detail);
}

void criterion_5_carleman() {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentConfig cfg = base_config("constant", 0.0);
    const CarlemanLabReport rep = run_carleman_report(cfg, "acceptance_out/carleman");
    const double secs = now_seconds(t0);
    const bool pass = rep.c4.min_clean_slope >= 0.9 && rep.c4.lambda0_found &&
                      rep.c4.best_C > 0.0 && rep.c6.lambda0_found && rep.c6.best_C > 0.0 &&
                      secs < 60.0;
    record(5, "weighted-estimate verification", pass,
           "slope " + fmt(rep.c4.min_clean_slope) + ", C4 C=" + fmt(rep.c4.best_C) +
               " l0=" + fmt(rep.c4.lambda0_emp) + ", C6 C=" + fmt(rep.c6.best_C) + ", " +
               fmt(secs) + "s");
}

void criterion_6_residual_certificate() {
    // transversely flat profile (transverse stencils exact) over a short
    // reduced horizon, so the order of the z/t discretization is observable
    // above the fixed expansion-truncation floor
    const MediumSpec m = MediumSpec::layered(0.2);
    std::vector<double> totals;
    for (const auto [zs, ts] : {std::pair{21, 21}, std::pair{41, 41}, std::pair{81, 81}}) {
        ExperimentConfig cfg = base_config("layered", 0.2);
        cfg.grid.z_samples = zs;
        cfg.grid.t_samples = ts;
        cfg.T1 = 0.05;
        const PipelineData pd = build_pipeline(cfg);
        const auto [R1, R2] = residuals(pd.data.w, pd.tt.tau, pd.grid, pd.data.A_floor);
        double r1 = 0.0;
        for (int i = 1; i <= pd.grid.n; ++i)
            for (int j = 1; j <= pd.grid.n; ++j)
                for (int k = 0; k < R1.nz; ++k)
                    for (int l = 0; l < R1.nt; ++l)
                        r1 += pd.grid.h() * pd.grid.h() * trapz_w(k, R1.nz) * pd.grid.dz() *
                              trapz_w(l, R1.nt) * pd.grid.dt() * R1.at(i, j, k, l) *
                              R1.at(i, j, k, l);
        totals.push_back(std::sqrt(r1) + std::sqrt(norm_sq(R2, Norm::L2h_Omega)));
    }
    const double order = std::log2(totals[0] / totals[1]);
    const bool pass = totals[0] > totals[1] && totals[1] > totals[2] && order >= 1.8;
    record(6, "transform/residual certificate", pass,
           "norms " + fmt(totals[0]) + " > " + fmt(totals[1]) + " > " + fmt(totals[2]) +
               ", order " + fmt(order));
}

void criterion_7_fdtd_crosscheck() {
    const ExperimentConfig cfg = base_config("bump", 0.1);
    const CrosscheckReport rep = run_forward_crosscheck(cfg, "acceptance_out/crosscheck");
    const bool pass = rep.probes > 100 &&
                      rep.arrival_hits >= static_cast<int>(0.95 * rep.probes) &&
                      rep.amplitude_hits >= static_cast<int>(0.95 * rep.probes);
    record(7, "time-domain cross-check", pass,
           "arrivals " + std::to_string(rep.arrival_hits) + "/" + std::to_string(rep.probes) +
               ", amplitudes " + std::to_string(rep.amplitude_hits) + "/" +
               std::to_string(rep.probes) + " (tol " + fmt(rep.arrival_tol) + ")");
}

void criterion_8_noiseless_inversion() {
    bool pass = true;
    std::string detail;
    const struct {
        const char* model;
        double amplitude;
        double target;
    } cases[] = {{"layered", 0.2, 0.05}, {"bump", 0.1, 0.10}};
    for (const auto& c : cases) {
        const auto t0 = std::chrono::steady_clock::now();
        const ExperimentConfig cfg = base_config(c.model, c.amplitude);
        const InversionRunReport rep =
            run_invert(cfg, std::string("acceptance_out/invert_") + c.model);
        const double secs = now_seconds(t0);
        // relative error against the analytic profile
        double den = 0.0;
        {
            const GridSpec g = cfg.horizon_grid();
            const MediumSpec m = cfg.medium;
            SemiDiscreteField n_true(g, 1);
            for (int i = 1; i <= g.n; ++i)
                for (int j = 1; j <= g.n; ++j)
                    for (int k = 0; k < g.z_samples; ++k)
                        n_true.at(i, j, k) = eval_n(m, {g.x(i), g.y(j), g.z(k)});
            den = std::sqrt(norm_sq(n_true, Norm::L2h_Omega));
        }
        const double rel = rep.err_n_medium / den;
        if (rel > c.target || secs >= 600.0) pass = false;
        detail += std::string(c.model) + " " + fmt(100.0 * rel) + "% (target " +
                  fmt(100.0 * c.target) + "%, " + fmt(secs) + "s); ";
    }
    record(8, "noiseless inversion accuracy", pass, detail);
}

void criterion_9_stability_sweep() {
    const ExperimentConfig cfg = base_config("layered", 0.2);
    const SweepReport rep = run_stability_sweep(cfg, "acceptance_out/sweep");
    const bool pass =
        rep.monotone && rep.slope >= 0.6 && rep.slope <= 1.4 && rep.below_curve;
    std::string errs;
    for (const auto& r : rep.records) errs += fmt(r.err_n) + " ";
    record(9, "stability sweep consistency", pass,
           "slope " + fmt(rep.slope) + ", monotone " + (rep.monotone ? "yes" : "no") +
               ", below C2 curve " + (rep.below_curve ? "yes" : "no") + ", errors " + errs);
}

void criterion_10_determinism() {
    const ExperimentConfig cfg = parse_config_text(R"(
        medium.model = layered
        medium.amplitude = 0.2
        grid.n = 4
        grid.z_samples = 11
        grid.t_samples = 9
        horizon.T1 = 1.2
        solver.max_iter = 25
        sweep.deltas = 1e-1, 1e-2
        seed = 77
    )");
    std::filesystem::remove_all("acceptance_out/det1");
    std::filesystem::remove_all("acceptance_out/det2");
    run_stability_sweep(cfg, "acceptance_out/det1");
    run_stability_sweep(cfg, "acceptance_out/det2");
    bool pass = true;
    std::string differing;
    for (const auto& entry : std::filesystem::directory_iterator("acceptance_out/det1")) {
        const std::string name = entry.path().filename().string();
        if (slurp("acceptance_out/det1/" + name) != slurp("acceptance_out/det2/" + name)) {
            pass = false;
            differing += name + " ";
        }
    }
    record(10, "seeded-run determinism", pass,
           pass ? "all artifacts byte-identical" : "differs: " + differing);
}

}  // namespace

int main() {
    std::filesystem::create_directories("acceptance_out");
    criterion_1_constant_exactness();
    criterion_2_layered_oracles();
    criterion_3_curvature_rate_bound();
    criterion_4_amplitude_floor();
    criterion_5_carleman();
    criterion_6_residual_certificate();
    criterion_7_fdtd_crosscheck();
    criterion_8_noiseless_inversion();
    criterion_9_stability_sweep();
    criterion_10_determinism();

    int fails = 0;
    for (const auto& c : g_results)
        if (!c.pass) ++fails;
    std::printf("%d/%zu criteria passed\n", static_cast<int>(g_results.size()) - fails,
                g_results.size());
    return fails;
}
