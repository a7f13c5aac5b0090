#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "pwcip/grid.hpp"

using namespace pwcip;

namespace {

GridSpec desk_grid() {
    GridSpec g;  // defaults: n=8, X=1.125 so h=0.25, 41 z-samples, 61 t-samples
    g.validate();
    return g;
}

SemiDiscreteField random_field(const GridSpec& g, int nt, unsigned seed) {
    SemiDiscreteField f(g, nt);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (auto& v : f.v) v = dist(rng);
    return f;
}

double dot(const SemiDiscreteField& a, const SemiDiscreteField& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.v.size(); ++i) s += a.v[i] * b.v[i];
    return s;
}

}  // namespace

TEST_CASE("grid layout and bounds") {
    GridSpec g = desk_grid();
    CHECK(g.h() == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(g.x(0) == doctest::Approx(-g.X));
    CHECK(g.x(g.n + 1) == doctest::Approx(g.X));
    GridSpec bad = g;
    bad.h0 = 0.3;  // h = 0.25 dips below the floor
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("transverse first differences: exact on linears") {
    GridSpec g = desk_grid();
    const auto lin = make_static_field(g, [](double x, double, double) { return x; });
    const auto cst = make_static_field(g, [](double, double, double) { return 3.5; });
    const auto dlin = op_dx(lin), dcst = op_dx(cst);
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j) {
            CHECK(dlin.at(i, j, 5) == doctest::Approx(1.0).epsilon(1e-13));
            CHECK(dcst.at(i, j, 5) == doctest::Approx(0.0).epsilon(1e-13));
        }
}

TEST_CASE("transverse first difference error bound on sin") {
    GridSpec g = desk_grid();  // h = 0.25
    const auto f = make_static_field(g, [](double x, double, double) { return std::sin(x); });
    const auto fx = op_dx(f);
    double worst = 0.0;
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j)
            worst = std::max(worst, std::abs(fx.at(i, j, 0) - std::cos(g.x(i))));
    // Taylor bound h^2/6 * max|f'''| with h = 0.25
    CHECK(worst <= 0.25 * 0.25 / 6.0 + 1e-12);
    CHECK(worst > 1e-4);  // the bound is nearly attained, not vacuous
}

TEST_CASE("transverse second differences: exact on quadratics, unlike dx twice") {
    GridSpec g = desk_grid();
    const auto f = make_static_field(g, [](double x, double, double) { return x * x; });
    const auto fxx = op_dxx(f);
    const auto fxfx = op_dx(op_dx(f));
    for (int i = 1; i <= g.n; ++i) {
        CHECK(fxx.at(i, 4, 0) == doctest::Approx(2.0).epsilon(1e-12));
    }
    // the composed operator is contaminated by the zeroed boundary layer of
    // the inner result at i = 1 and i = N
    CHECK(std::abs(fxfx.at(1, 4, 0) - 2.0) > 0.5);
    const auto flin = make_static_field(g, [](double x, double, double) { return 2.0 * x + 1.0; });
    const auto flinxx = op_dxx(flin);
    CHECK(flinxx.at(3, 3, 7) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("transverse second difference on cos, measured error") {
    GridSpec g = desk_grid();
    const auto f = make_static_field(g, [](double, double y, double) { return std::cos(y); });
    const auto fyy = op_dyy(f);
    double worst = 0.0;
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j)
            worst = std::max(worst, std::abs(fyy.at(i, j, 0) + std::cos(g.y(j))));
    CHECK(worst <= 5.3e-3);
}

TEST_CASE("discrete Laplacian and gradient") {
    GridSpec g = desk_grid();
    const auto f = make_static_field(
        g, [](double x, double y, double z) { return x * x + y * y + z * z; });
    const auto lap = laplacian_h(f);
    for (int i = 1; i <= g.n; ++i)
        for (int k = 1; k < g.z_samples - 1; ++k)
            CHECK(lap.at(i, 3, k) == doctest::Approx(6.0).epsilon(1e-10));

    const auto harm = make_static_field(g, [](double x, double y, double) { return x * x - y * y; });
    const auto lap2 = laplacian_h(harm);
    for (int i = 1; i <= g.n; ++i) CHECK(lap2.at(i, 5, 3) == doctest::Approx(0.0).epsilon(1e-11));

    const auto tau = make_static_field(g, [](double, double, double z) { return z; });
    const auto grads = grad_h(tau);
    CHECK(grads[0].at(4, 4, 10) == doctest::Approx(0.0));
    CHECK(grads[1].at(4, 4, 10) == doctest::Approx(0.0));
    CHECK(grads[2].at(4, 4, 10) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(grads[2].at(4, 4, 0) == doctest::Approx(1.0).epsilon(1e-12));  // one-sided end
}

TEST_CASE("operators are linear (random fields)") {
    GridSpec g = desk_grid();
    g.z_samples = 17;
    g.t_samples = 9;
    const auto f1 = random_field(g, 9, 1);
    const auto f2 = random_field(g, 9, 2);
    const double a = 0.7, b = -1.3;
    SemiDiscreteField comb(g, 9);
    for (size_t q = 0; q < comb.v.size(); ++q) comb.v[q] = a * f1.v[q] + b * f2.v[q];
    for (auto op : {op_dx, op_dy, op_dxx, op_dyy, op_dz, op_dzz, op_dt, op_dzt}) {
        const auto lhs = op(comb);
        const auto r1 = op(f1), r2 = op(f2);
        double worst = 0.0;
        for (size_t q = 0; q < lhs.v.size(); ++q)
            worst = std::max(worst, std::abs(lhs.v[q] - a * r1.v[q] - b * r2.v[q]));
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("adjoint identities <A f, g> == <f, At g>") {
    GridSpec g = desk_grid();
    g.z_samples = 13;
    g.t_samples = 7;
    const auto f = random_field(g, 7, 11);
    const auto w = random_field(g, 7, 12);
    const std::pair<SemiDiscreteField (*)(const SemiDiscreteField&),
                    SemiDiscreteField (*)(const SemiDiscreteField&)>
        pairs[] = {{op_dx, adj_dx},   {op_dy, adj_dy}, {op_dxx, adj_dxx},
                   {op_dyy, adj_dyy}, {op_dz, adj_dz}, {op_dt, adj_dt}};
    for (const auto& [fwd, adj] : pairs) {
        const double lhs = dot(fwd(f), w);
        const double rhs = dot(f, adj(w));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
    }
}

TEST_CASE("volume norms: hand-computed values") {
    GridSpec g = desk_grid();
    // constant c on the closed slab: L2h^2 = c^2 * (N h)^2 * (unit z-integral)
    const double c = 2.25;
    const auto f = make_static_field(g, [&](double, double, double) { return c; });
    const double expect = c * c * (g.n * g.h()) * (g.n * g.h()) * 1.0;
    CHECK(norm_sq(f, Norm::L2h_Omega) == doctest::Approx(expect).epsilon(1e-12));

    SemiDiscreteField zero(g, 1);
    CHECK(norm_sq(zero, Norm::L2h_Omega) == 0.0);
    CHECK(norm_sq(zero, Norm::H1h_Omega) == 0.0);
    SemiDiscreteField zt(g, g.t_samples);
    CHECK(norm_sq(zt, Norm::H2h_Q) == 0.0);
}

TEST_CASE("trace norms: literal weights") {
    GridSpec g = desk_grid();  // N=8, h=0.25, T1=3
    GammaTrace tr(g, g.t_samples);
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j)
            for (int l = 0; l < g.t_samples; ++l) tr.at(i, j, l) = 0.5;
    // single h weight: 0.25 * 64 * 0.25 * 3 = 12
    CHECK(norm_sq_L2h_Gamma(tr) == doctest::Approx(12.0).epsilon(1e-12));
    // h^2 weight on the H1 trace norm; constant trace has zero t-derivative
    CHECK(norm_sq_H1h_Gamma(tr) == doctest::Approx(0.25 * 64 * 0.0625 * 3.0).epsilon(1e-12));

    ThetaTrace th(g, g.t_samples);
    for (auto& v : th.v) v = 1.0;
    // four faces, (N+2) nodes each with weight h, corners double-counted:
    // 4 * 10 * 0.25 * (z-integral 1) * (t-integral 3)
    CHECK(norm_sq_L2h_Theta(th) == doctest::Approx(4.0 * 10.0 * 0.25 * 3.0).epsilon(1e-12));
}

TEST_CASE("norm monotonicity L2 <= H1 <= H2 on the common domain") {
    GridSpec g = desk_grid();
    g.z_samples = 21;
    g.t_samples = 13;
    const auto f = make_field(g, g.t_samples, [](double x, double y, double z, double t) {
        return std::sin(x + 0.5 * y) * (1.0 + z * z) * std::cos(0.3 * t);
    });
    const double l2 = norm_sq_H1h_Q_window(f, g.T1);  // contains the L2 part
    const auto f0 = f.slice_t0();
    CHECK(norm_sq(f0, Norm::L2h_Omega) <= norm_sq(f0, Norm::H1h_Omega));
    CHECK(l2 <= norm_sq(f, Norm::H2h_Q) + 1e-12);
}

TEST_CASE("windowed H1 norm integrates only (0, t1)") {
    GridSpec g = desk_grid();
    // field vanishing for t <= t1: window norm must be ~0, full norm not
    const auto f = make_field(g, g.t_samples, [&](double, double, double, double t) {
        return t > g.t1 ? (t - g.t1) * (t - g.t1) : 0.0;
    });
    CHECK(norm_sq_H1h_Q_window(f, g.t1) < 1e-6 * norm_sq_H1h_Q_window(f, g.T1));
}

TEST_CASE("domain mismatch raises") {
    GridSpec g = desk_grid();
    SemiDiscreteField stat(g, 1), timed(g, g.t_samples);
    CHECK_THROWS_AS((void)norm_sq(timed, Norm::L2h_Omega), DomainMismatch);
    CHECK_THROWS_AS((void)norm_sq(stat, Norm::H2h_Q), DomainMismatch);
}
