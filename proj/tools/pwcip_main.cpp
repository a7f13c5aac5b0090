// Command-line driver for the plane-wave inverse-problem laboratory.
//
//   pwcip validate-medium --config cfg [--out dir]
//   pwcip geodesics       --config cfg [--out dir]
//   pwcip forward         --config cfg [--out dir] [--crosscheck]
//   pwcip carleman        --config cfg [--out dir]
//   pwcip invert          --config cfg [--out dir] [--delta d] [--seed s]
//   pwcip sweep           --config cfg [--out dir] [--seed s]

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "pwcip/lab.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    uint64_t seed = 0;
    int threads = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "seed override")->each([&](const std::string&) {
        args.seed_set = true;
    });
    cmd->add_option("--threads", args.threads, "worker threads");
}

pwcip::ExperimentConfig load(const CommonArgs& args) {
    pwcip::ExperimentConfig cfg = pwcip::load_config(args.config_path);
    if (args.seed_set) cfg.seed = args.seed;
    if (args.threads > 0) cfg.threads = args.threads;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for the plane-wave coefficient inverse problem"};
    app.require_subcommand(1);

    CommonArgs a_validate, a_geo, a_fwd, a_car, a_inv, a_sweep;
    bool crosscheck = false;
    double delta = 0.0;

    CLI::App* c_validate = app.add_subcommand("validate-medium", "check medium admissibility");
    add_common(c_validate, a_validate);
    CLI::App* c_geo = app.add_subcommand("geodesics", "travel time, amplitude, regularity");
    add_common(c_geo, a_geo);
    CLI::App* c_fwd = app.add_subcommand("forward", "reduced data generation");
    add_common(c_fwd, a_fwd);
    c_fwd->add_flag("--crosscheck", crosscheck, "also run the time-domain cross-check");
    CLI::App* c_car = app.add_subcommand("carleman", "weighted estimate verification");
    add_common(c_car, a_car);
    CLI::App* c_inv = app.add_subcommand("invert", "single reconstruction");
    add_common(c_inv, a_inv);
    c_inv->add_option("--delta", delta, "data error level in (0,1); 0 for noiseless");
    CLI::App* c_sweep = app.add_subcommand("sweep", "stability sweep over data error levels");
    add_common(c_sweep, a_sweep);

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_validate->parsed()) {
            const bool ok = pwcip::run_validate_medium(load(a_validate), a_validate.out_dir);
            std::printf("validate-medium: %s\n", ok ? "pass" : "FAIL");
            return ok ? 0 : 1;
        }
        if (c_geo->parsed()) {
            const auto rep = pwcip::run_geodesic_report(load(a_geo), a_geo.out_dir);
            std::printf("geodesics: trace rate %.6g (bound %.6g), min A %.6g (floor %.6g), "
                        "regularity %s (min det %.4g)\n",
                        rep.max_trace_rate, rep.trace_rate_bound, rep.min_A, rep.A0,
                        rep.regularity.pass ? "pass" : "FAIL", rep.regularity.min_det);
            return (rep.max_trace_rate <= rep.trace_rate_bound + 1e-6 && rep.min_A >= rep.A0 &&
                    rep.regularity.pass)
                       ? 0
                       : 1;
        }
        if (c_fwd->parsed()) {
            const auto cfg = load(a_fwd);
            pwcip::run_forward_products(cfg, a_fwd.out_dir);
            std::printf("forward: reduced data written to %s\n", a_fwd.out_dir.c_str());
            if (crosscheck) {
                const auto rep = pwcip::run_forward_crosscheck(cfg, a_fwd.out_dir);
                std::printf("crosscheck: arrivals %d/%d, amplitudes %d/%d, route L2 %.3f\n",
                            rep.arrival_hits, rep.probes, rep.amplitude_hits, rep.probes,
                            rep.route_l2_rel);
            }
            return 0;
        }
        if (c_car->parsed()) {
            const auto rep = pwcip::run_carleman_report(load(a_car), a_car.out_dir);
            std::printf("carleman: first estimate C=%.4g lambda0=%.3g slope=%.3f | "
                        "second estimate C=%.4g lambda0=%.3g\n",
                        rep.c4.best_C, rep.c4.lambda0_emp, rep.c4.min_clean_slope, rep.c6.best_C,
                        rep.c6.lambda0_emp);
            return (rep.c4.lambda0_found && rep.c4.best_C > 0.0 && rep.c6.lambda0_found &&
                    rep.c6.best_C > 0.0)
                       ? 0
                       : 1;
        }
        if (c_inv->parsed()) {
            const auto rep =
                pwcip::run_invert(load(a_inv), a_inv.out_dir, delta, a_inv.seed_set ? a_inv.seed : 0);
            std::printf("invert: J=%.6g iters=%d err_n=%.6g err_n_vs_medium=%.6g (%.1fs)\n",
                        rep.J, rep.iterations, rep.err_n, rep.err_n_medium, rep.seconds);
            return 0;
        }
        if (c_sweep->parsed()) {
            const auto rep = pwcip::run_stability_sweep(load(a_sweep), a_sweep.out_dir);
            std::printf("sweep: slope=%.3f C2=%.4g monotone=%s below-curve=%s\n", rep.slope,
                        rep.C2_max, rep.monotone ? "yes" : "no", rep.below_curve ? "yes" : "no");
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
