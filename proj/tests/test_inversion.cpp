#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "pwcip/inversion.hpp"

using namespace pwcip;

namespace {

// transformed data straight from the optics pipeline
TransformedData make_data(const MediumSpec& m, GridSpec g, double T1, int r_trunc = 2) {
    g.T1 = T1;
    g.t1 = T1 / 3.0;
    const double T = T1 + m.n0;
    const TravelTimeField tt = travel_time_field(m, g);
    AmplitudeField amp = amplitude_field(m, g, tt);
    higher_amplitudes(m, g, tt, amp, r_trunc);
    const WaveField wf = optics_forward(m, g, tt, amp, T);
    const CipData cip = extract_cip_data(wf);
    return transform_chain(m, wf, cip, tt, T);
}

InversionProblem make_problem(const MediumSpec& m, const TransformedData& data) {
    InversionProblem prob;
    prob.grid = data.grid;
    prob.data = data;
    prob.set.A0 = amplitude_floor(m.n0, m.n00);
    prob.set.n0 = m.n0;
    prob.set.M = 5.0;
    prob.carleman.xi0 = 1.0;
    prob.carleman.xi1 = m.n0;
    prob.carleman.xi2 = prob.set.M;
    prob.opts.alpha = prob.carleman.alpha0();
    prob.carleman.alpha = prob.opts.alpha;
    return prob;
}

double rel_l2_interior(const SemiDiscreteField& a, const SemiDiscreteField& b) {
    double num = 0.0, den = 0.0;
    for (int i = 1; i <= a.grid.n; ++i)
        for (int j = 1; j <= a.grid.n; ++j)
            for (int k = 0; k < a.nz; ++k) {
                const double d = a.at(i, j, k) - b.at(i, j, k);
                num += d * d;
                den += b.at(i, j, k) * b.at(i, j, k);
            }
    return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("residuals vanish at the constant-medium truth") {
    const MediumSpec m = MediumSpec::constant();
    GridSpec g;
    g.z_samples = 21;
    const TransformedData td = make_data(m, g, 2.0);
    const auto [R1, R2] = residuals(td.w, make_static_field(td.grid, [](double, double, double z) {
                                        return z;
                                    }),
                                    td.grid, amplitude_floor(m.n0, m.n00));
    CHECK(max_abs(R1) < 1e-9);
    CHECK(max_abs(R2) < 1e-9);
}

TEST_CASE("quadratic tau perturbation shifts the static residual by its stencil value") {
    const MediumSpec m = MediumSpec::constant();
    GridSpec g;
    g.z_samples = 21;
    const TransformedData td = make_data(m, g, 2.0);
    const auto tau_pert = make_static_field(td.grid, [](double, double, double z) {
        return z + 0.1 * z * z;
    });
    const auto [R1, R2] = residuals(td.w, tau_pert, td.grid, amplitude_floor(m.n0, m.n00));
    // with a flat w the log-gradient term is zero, so R2 = lap_h(0.1 z^2) = 0.2
    for (int i = 1; i <= td.grid.n; ++i)
        for (int k = 0; k < td.grid.z_samples; ++k)
            CHECK(R2.at(i, 4, k) == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("floor guard on the t=0 slice") {
    const MediumSpec m = MediumSpec::constant();
    GridSpec g;
    g.z_samples = 13;
    const TransformedData td = make_data(m, g, 2.0);
    SemiDiscreteField w_bad = td.w;
    w_bad.at(3, 3, 5, 0) = 1e-6;  // below the floor at one node
    CHECK_THROWS_AS((void)residuals(w_bad, make_static_field(td.grid,
                                                             [](double, double, double z) {
                                                                 return z;
                                                             }),
                                    td.grid, amplitude_floor(m.n0, m.n00)),
                    FloorViolation);
}

TEST_CASE("zero-residual certificate: truth residuals shrink at second order") {
    // transversely flat medium so the transverse stencils are exact, and a
    // short reduced horizon so the expansion-truncation part of the residual
    // (which does not shrink with sampling) stays subdominant
    const MediumSpec m = MediumSpec::layered(0.2);
    std::vector<double> totals;
    for (const auto [zs, ts] : {std::pair{21, 21}, std::pair{41, 41}, std::pair{81, 81}}) {
        GridSpec g;
        g.z_samples = zs;
        g.t_samples = ts;
        const TransformedData td = make_data(m, g, 0.05);
        const TravelTimeField tt = travel_time_field(m, td.grid);
        const auto [R1, R2] = residuals(td.w, tt.tau, td.grid, amplitude_floor(m.n0, m.n00));
        double r1 = 0.0;
        for (int i = 1; i <= td.grid.n; ++i)
            for (int j = 1; j <= td.grid.n; ++j)
                for (int k = 0; k < R1.nz; ++k)
                    for (int l = 0; l < R1.nt; ++l)
                        r1 += td.grid.h() * td.grid.h() * trapz_w(k, R1.nz) * td.grid.dz() *
                              trapz_w(l, R1.nt) * td.grid.dt() * R1.at(i, j, k, l) *
                              R1.at(i, j, k, l);
        totals.push_back(std::sqrt(r1) + std::sqrt(norm_sq(R2, Norm::L2h_Omega)));
    }
    CHECK(totals[0] > totals[1]);
    CHECK(totals[1] > totals[2]);
    const double order = std::log2(totals[0] / totals[1]);
    CHECK(order >= 1.8);
}

TEST_CASE("objective: zero weights give a zero functional") {
    const MediumSpec m = MediumSpec::constant();
    GridSpec g;
    g.n = 4;
    g.z_samples = 9;
    g.t_samples = 7;
    const TransformedData td = make_data(m, g, 1.5);
    InversionProblem prob = make_problem(m, td);
    prob.opts.beta = 0.0;
    prob.opts.w_r1 = 0.0;
    prob.opts.w_r2 = 0.0;
    SemiDiscreteField w = td.w;
    const auto tau = make_static_field(td.grid, [](double, double, double z) { return z; });
    const ObjectiveEval ev = objective(w, tau, prob);
    CHECK(ev.J == 0.0);
    CHECK(max_abs(ev.grad_w) == 0.0);
    CHECK(max_abs(ev.grad_tau) == 0.0);
}

TEST_CASE("objective: truth point of exact data sits at the discretization floor") {
    const MediumSpec m = MediumSpec::layered(0.2);
    GridSpec g;
    g.z_samples = 21;
    g.t_samples = 16;
    const TransformedData td = make_data(m, g, 0.2);
    InversionProblem prob = make_problem(m, td);
    prob.opts.sigma_smooth = 0.0;  // measure the residual identity alone
    const TravelTimeField tt = travel_time_field(m, td.grid);
    const ObjectiveEval at_truth = objective(td.w, tt.tau, prob);
    // an off-truth admissible point scores much worse
    SemiDiscreteField w_off = td.w;
    for (auto& v : w_off.v) v = 0.4;
    const auto tau_off = make_static_field(td.grid, [](double, double, double z) { return z; });
    const ObjectiveEval off = objective(w_off, tau_off, prob);
    CHECK(at_truth.J < 5e-4);
    CHECK(at_truth.J < 1e-3 * off.J);
}

TEST_CASE("analytic gradient against directional finite differences") {
    const MediumSpec m = MediumSpec::layered(0.15);
    GridSpec g;
    g.n = 4;
    g.z_samples = 9;
    g.t_samples = 7;
    const TransformedData td = make_data(m, g, 1.2);
    InversionProblem prob = make_problem(m, td);

    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uw(0.3, 0.8), us(1.0, 1.15), ud(-1.0, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        SemiDiscreteField w(td.grid, td.grid.t_samples), sigma(td.grid, 1);
        for (auto& v : w.v) v = uw(rng);
        for (auto& v : sigma.v) v = us(rng);
        const SemiDiscreteField tau = tau_from_sigma(sigma);

        SemiDiscreteField dw(td.grid, td.grid.t_samples), dtau(td.grid, 1);
        for (auto& v : dw.v) v = ud(rng);
        for (auto& v : dtau.v) v = ud(rng);

        const ObjectiveEval ev = objective(w, tau, prob);
        double gdot = 0.0;
        for (size_t q = 0; q < dw.v.size(); ++q) gdot += ev.grad_w.v[q] * dw.v[q];
        for (size_t q = 0; q < dtau.v.size(); ++q) gdot += ev.grad_tau.v[q] * dtau.v[q];

        const double step = 1e-6;
        SemiDiscreteField wp = w, wm = w, tp = tau, tm = tau;
        for (size_t q = 0; q < w.v.size(); ++q) {
            wp.v[q] += step * dw.v[q];
            wm.v[q] -= step * dw.v[q];
        }
        for (size_t q = 0; q < tau.v.size(); ++q) {
            tp.v[q] += step * dtau.v[q];
            tm.v[q] -= step * dtau.v[q];
        }
        const double fd =
            (objective(wp, tp, prob).J - objective(wm, tm, prob).J) / (2.0 * step);
        CHECK(std::abs(fd - gdot) / std::max(1.0, std::abs(gdot)) < 1e-5);
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("minimizer: constant-medium data converges immediately from the flat start") {
    const MediumSpec m = MediumSpec::constant();
    GridSpec g;
    g.n = 6;
    g.z_samples = 17;
    g.t_samples = 13;
    const TransformedData td = make_data(m, g, 1.5);
    InversionProblem prob = make_problem(m, td);
    const InversionResult res = minimize(prob);
    CHECK(res.status == SolveStatus::Converged);
    CHECK(res.iterations == 0);
    CHECK(res.J_final < 1e-12);
    for (int i = 1; i <= td.grid.n; ++i)
        for (int k = 0; k < td.grid.z_samples; ++k)
            CHECK(res.n_hat.at(i, 3, k) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("minimizer: monotone descent and error reduction on layered data") {
    const MediumSpec m = MediumSpec::layered(0.2);
    GridSpec g;
    g.n = 6;
    g.z_samples = 21;
    g.t_samples = 31;
    // the full horizon 3/alpha: short data windows leave the far profile
    // underdetermined relative to the expansion-truncation residual
    const TransformedData td = make_data(m, g, 4.5 * m.n0);
    InversionProblem prob = make_problem(m, td);
    prob.opts.max_iter = 1200;
    const InversionResult res = minimize(prob);
    for (size_t q = 1; q < res.trace.size(); ++q)
        CHECK(res.trace[q].J <= res.trace[q - 1].J + 1e-15);
    // every iterate respected the slope box
    for (double v : res.sigma_hat.v) {
        CHECK(v >= 1.0);
        CHECK(v <= m.n0);
    }
    // against the true profile
    const auto n_true = make_static_field(td.grid, [&](double x, double y, double z) {
        return eval_n(m, {x, y, z});
    });
    SemiDiscreteField n_flat(td.grid, 1);
    for (auto& v : n_flat.v) v = 1.0;
    const double err = rel_l2_interior(res.n_hat, n_true);
    const double err0 = rel_l2_interior(n_flat, n_true);
    CHECK(err < 0.7 * err0);
}

TEST_CASE("n recovery: identity, quadrature profile and the difference bound") {
    GridSpec g;
    g.z_samples = 21;
    const auto tau_id = make_static_field(g, [](double, double, double z) { return z; });
    const SemiDiscreteField n_id = recover_n(tau_id, g);
    for (int i = 1; i <= g.n; ++i)
        for (int k = 0; k < g.z_samples; ++k)
            CHECK(n_id.at(i, 4, k) == doctest::Approx(1.0).epsilon(1e-12));

    const MediumSpec m = MediumSpec::layered(0.2);
    const TravelTimeField tt = travel_time_field(m, g);
    const SemiDiscreteField n_rec = recover_n(tt.tau, g);
    for (int k = 2; k < g.z_samples - 1; k += 4) {
        const double expect = eval_n(m, {0.0, 0.0, g.z(k)});
        CHECK(n_rec.at(4, 4, k) == doctest::Approx(expect).epsilon(2e-3));
    }

    // pointwise chain bound: |n1 - n2| <= n0 |grad_h (tau1 - tau2)|
    const auto tau2 = make_static_field(g, [&](double x, double y, double z) {
        return tt.tau.at(0, 0, 0) * 0.0 + z + 0.03 * z * z * (1.0 + 0.1 * x);
    });
    const SemiDiscreteField n2 = recover_n(tau2, g);
    SemiDiscreteField dtau(g, 1);
    for (size_t q = 0; q < dtau.v.size(); ++q) dtau.v[q] = tt.tau.v[q] - tau2.v[q];
    const SemiDiscreteField ndiff = recover_n(dtau, g);  // |grad of the difference|
    for (int i = 1; i <= g.n; ++i)
        for (int k = 0; k < g.z_samples; ++k) {
            const double lhs = std::abs(n_rec.at(i, 4, k) - n2.at(i, 4, k));
            CHECK(lhs <= m.n0 * ndiff.at(i, 4, k) + 1e-12);
        }
}
