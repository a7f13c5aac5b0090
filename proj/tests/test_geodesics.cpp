#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "pwcip/geodesics.hpp"

using namespace pwcip;

TEST_CASE("constant medium: straight vertical ray, exact momentum") {
    const MediumSpec m = MediumSpec::constant();
    const GeodesicPath path = trace_geodesic(m, 0.0, 0.0, 1.0, 1e-3);
    CHECK(path.eikonal_defect < 1e-14);
    const RayNode& end = path.nodes.back();
    CHECK(end.s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(end.x.x == doctest::Approx(0.0));
    CHECK(end.x.y == doctest::Approx(0.0));
    CHECK(end.x.z == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(end.p.z == doctest::Approx(1.0).epsilon(1e-12));
    // launch conventions
    CHECK(path.nodes.front().p.z == 1.0);
    CHECK(path.nodes.front().x.z == 0.0);
}

TEST_CASE("layered medium: vertical ray against the 1-D quadrature oracle") {
    const MediumSpec m = MediumSpec::layered(0.2);
    const GeodesicPath path = trace_geodesic(m, 0.0, 0.0, 1.1, 1e-3);
    for (const RayNode& nd : path.nodes) {
        CHECK(std::abs(nd.x.x) < 1e-14);
        CHECK(std::abs(nd.p.x) < 1e-14);
        CHECK(std::abs(nd.p.y) < 1e-14);
    }
    // s(z) = int_0^z n: invert the oracle at a few arc values
    for (double s : {0.3, 0.7, 1.05}) {
        const size_t idx = static_cast<size_t>(std::round(s / path.ds));
        const double z_ray = path.nodes[idx].x.z;
        const double z_oracle = oracle::layered_z_of_s(m, path.nodes[idx].s);
        CHECK(z_ray == doctest::Approx(z_oracle).epsilon(1e-8));
    }
}

TEST_CASE("windowed bump: off-axis ray bends and keeps the eikonal defect tiny") {
    const MediumSpec m = MediumSpec::bump(0.1);
    // launch inside the window's transition ring where the transverse
    // gradient is active
    const GeodesicPath path = trace_geodesic(m, 0.5, -0.35, 1.1, 1e-3);
    CHECK(path.eikonal_defect < 1e-8);
    // curvature: the transverse momentum must move off zero inside the bump
    double max_pt = 0.0;
    for (const RayNode& nd : path.nodes)
        max_pt = std::max(max_pt, std::hypot(nd.p.x, nd.p.y));
    CHECK(max_pt > 1e-4);
}

TEST_CASE("eikonal defect scales like ds^4") {
    const MediumSpec m = MediumSpec::bump(0.1);
    const double d_coarse = trace_geodesic(m, 0.2, 0.1, 1.0, 8e-3, 1.0).eikonal_defect;
    const double d_fine = trace_geodesic(m, 0.2, 0.1, 1.0, 4e-3, 1.0).eikonal_defect;
    CHECK(d_coarse / std::max(d_fine, 1e-300) > 8.0);  // nominal 16
    // stated sup-norm envelope at the shipped step
    const GeodesicPath p = trace_geodesic(m, 0.2, 0.1, 1.0, 1e-3);
    CHECK(p.eikonal_defect < 10.0 * std::pow(1e-3, 4) * 1.0 + 1e-12);
}

TEST_CASE("step failure on crude step over a structured medium") {
    const MediumSpec m = MediumSpec::bump(0.1);
    CHECK_THROWS_AS((void)trace_geodesic(m, 0.2, 0.1, 1.0, 0.2, 1e-14), StepFailure);
}

TEST_CASE("curvature transport: constant medium stays at zero") {
    const MediumSpec m = MediumSpec::constant();
    const GeodesicPath path = trace_geodesic(m, 0.1, 0.2, 1.0, 1e-3);
    const auto states = transport_curvature(m, path);
    REQUIRE(states.size() == path.nodes.size());
    for (const auto& st : states) CHECK(st.kappa.max_abs() == 0.0);
}

TEST_CASE("curvature transport: layered medium matches the scalar Riccati oracle") {
    const MediumSpec m = MediumSpec::layered(0.2);
    const GeodesicPath path = trace_geodesic(m, 0.0, 0.0, 1.1, 1e-3);
    const auto states = transport_curvature(m, path);
    // only the zz entry is active
    for (const auto& st : states) {
        CHECK(std::abs(st.kappa(0, 0)) < 1e-13);
        CHECK(std::abs(st.kappa(0, 2)) < 1e-13);
        CHECK(std::abs(st.kappa(1, 1)) < 1e-13);
    }
    const auto ref = oracle::layered_riccati(m, states.back().s);
    CHECK(states.back().kappa(2, 2) == doctest::Approx(ref.k).epsilon(1e-8));
    // symmetry to round-off on a bump medium
    const MediumSpec mb = MediumSpec::bump(0.1);
    const GeodesicPath pb = trace_geodesic(mb, 0.2, -0.15, 1.0, 1e-3);
    for (const auto& st : transport_curvature(mb, pb))
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < i; ++j)
                CHECK(st.kappa(i, j) == doctest::Approx(st.kappa(j, i)).epsilon(1e-12));
}

TEST_CASE("curvature trace rate honors the 6 n00^2 envelope") {
    for (const MediumSpec& m :
         {MediumSpec::constant(), MediumSpec::layered(0.2), MediumSpec::bump(0.1)}) {
        const double rate = max_trace_rate_over_fan(m, 0.9, 7, 1.1);
        CHECK(rate <= 6.0 * m.n00 * m.n00 + 1e-6);
    }
}

TEST_CASE("travel time field: constant medium is exactly z") {
    const MediumSpec m = MediumSpec::constant();
    GridSpec g;
    g.z_samples = 21;
    const TravelTimeField tt = travel_time_field(m, g);
    for (int i = 0; i < g.n + 2; ++i)
        for (int k = 0; k < g.z_samples; ++k) {
            CHECK(tt.tau.at(i, 4, k) == doctest::Approx(g.z(k)).epsilon(1e-10));
            CHECK(tt.dz_tau.at(i, 4, k) == doctest::Approx(1.0).epsilon(1e-10));
        }
}

TEST_CASE("travel time field: layered medium against quadrature; boundary data") {
    const MediumSpec m = MediumSpec::layered(0.2);
    GridSpec g;
    g.z_samples = 21;
    const TravelTimeField tt = travel_time_field(m, g);
    for (int k = 0; k < g.z_samples; ++k) {
        const double ref = oracle::layered_tau(m, g.z(k));
        CHECK(tt.tau.at(4, 4, k) == doctest::Approx(ref).epsilon(1e-7));
    }
    // integral of the smoothstep over [0,1] is 1/2, so tau(.,.,1) = 1.1
    CHECK(tt.tau.at(4, 4, g.z_samples - 1) == doctest::Approx(1.1).epsilon(1e-6));
    // source-plane boundary values
    for (int i = 1; i <= g.n; ++i) {
        CHECK(tt.tau.at(i, 3, 0) == 0.0);
        CHECK(tt.dz_tau.at(i, 3, 0) == 1.0);
    }
    // monotone class: dz tau within [1, n0]
    for (int k = 0; k < g.z_samples; ++k) {
        CHECK(tt.dz_tau.at(4, 4, k) >= 1.0 - 1e-6);
        CHECK(tt.dz_tau.at(4, 4, k) <= m.n0 + 1e-6);
    }
}

TEST_CASE("travel time field: bump medium satisfies the eikonal discretely") {
    const MediumSpec m = MediumSpec::bump(0.1);
    GridSpec g;
    g.z_samples = 21;
    const TravelTimeField tt = travel_time_field(m, g);
    // ray-exact gradient: |grad tau| = n at every node
    double worst = 0.0;
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j)
            for (int k = 0; k < g.z_samples; ++k) {
                const Vec3 p{tt.grad[0].at(i, j, k), tt.grad[1].at(i, j, k),
                             tt.grad[2].at(i, j, k)};
                const double n = eval_n(m, {g.x(i), g.y(j), g.z(k)});
                worst = std::max(worst, std::abs(p.norm() - n));
            }
    CHECK(worst < 1e-8);
    // discrete gradient of the tau samples reproduces n to O(h^2)+O(ds^4)
    const auto grads = grad_h(tt.tau);
    double worst_h = 0.0;
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j)
            for (int k = 1; k < g.z_samples - 1; ++k) {
                const double gx = grads[0].at(i, j, k), gy = grads[1].at(i, j, k),
                             gz = grads[2].at(i, j, k);
                const double n = eval_n(m, {g.x(i), g.y(j), g.z(k)});
                worst_h = std::max(worst_h, std::abs(std::sqrt(gx * gx + gy * gy + gz * gz) - n));
            }
    CHECK(worst_h < 5e-3);  // h = 0.25, smooth bump
}

TEST_CASE("tau stays below n0 over the closed slab") {
    for (const MediumSpec& m : {MediumSpec::layered(0.2), MediumSpec::bump(0.1)}) {
        GridSpec g;
        g.z_samples = 11;
        const TravelTimeField tt = travel_time_field(m, g);
        double worst = 0.0;
        for (double v : tt.tau.v) worst = std::max(worst, v);
        CHECK(worst <= m.n0 + 1e-9);
    }
}

TEST_CASE("amplitude: constant medium is one half, floor formula value") {
    const MediumSpec m = MediumSpec::constant();
    GridSpec g;
    g.z_samples = 11;
    const TravelTimeField tt = travel_time_field(m, g);
    const AmplitudeField amp = amplitude_field(m, g, tt);
    for (double v : amp.A.v) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
    // floor at n0=1.2, n00=1.5: exp(-3 * 2.25 * 1.44 / 2)/2
    CHECK(amplitude_floor(1.2, 1.5) == doctest::Approx(3.871e-3).epsilon(1e-3));
    CHECK(amp.floor_ok);
}

TEST_CASE("amplitude: layered medium against the scalar Riccati oracle") {
    const MediumSpec m = MediumSpec::layered(0.2);
    GridSpec g;
    g.z_samples = 21;
    const TravelTimeField tt = travel_time_field(m, g);
    const AmplitudeField amp = amplitude_field(m, g, tt);
    const double s_top = tt.tau.at(4, 4, g.z_samples - 1);
    const auto ref = oracle::layered_riccati(m, s_top);
    const double a_ref = 0.5 * std::exp(-0.5 * ref.amp_int);
    CHECK(amp.A.at(4, 4, g.z_samples - 1) == doctest::Approx(a_ref).epsilon(1e-6));
    CHECK(amp.floor_ok);
    CHECK(amp.min_A >= amp.A0);
}

TEST_CASE("amplitude floor holds for the admissible suite") {
    for (const MediumSpec& m : {MediumSpec::layered(0.2), MediumSpec::bump(0.1)}) {
        GridSpec g;
        g.z_samples = 11;
        const TravelTimeField tt = travel_time_field(m, g);
        const AmplitudeField amp = amplitude_field(m, g, tt);
        CHECK(amp.min_A >= amp.A0);
        CHECK(amp.max_trace_rate <= 6.0 * m.n00 * m.n00 + 1e-6);
    }
}

TEST_CASE("higher amplitudes: zero for constant medium, zero on the plane") {
    const MediumSpec m = MediumSpec::constant();
    GridSpec g;
    g.z_samples = 11;
    const TravelTimeField tt = travel_time_field(m, g);
    AmplitudeField amp = amplitude_field(m, g, tt);
    higher_amplitudes(m, g, tt, amp, 2);
    REQUIRE(amp.alphas.size() == 2);
    for (const auto& a : amp.alphas)
        for (double v : a.v) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("higher amplitudes: layered first order against a 1-D oracle") {
    const MediumSpec m = MediumSpec::layered(0.2);
    GridSpec g;
    g.z_samples = 41;
    const TravelTimeField tt = travel_time_field(m, g);
    AmplitudeField amp = amplitude_field(m, g, tt);
    higher_amplitudes(m, g, tt, amp, 1);
    REQUIRE(amp.alphas.size() == 1);
    for (int i = 1; i <= g.n; ++i) CHECK(amp.alphas[0].at(i, 4, 0) == 0.0);

    // oracle: alpha1(z) = a0(z)/2 * int (d2z a0)/(n^2 a0) ds with the
    // integrand interpolated linearly between the grid's own z-samples,
    // matching the transport path through the sampled driving term
    std::vector<double> a0(g.z_samples), d2(g.z_samples);
    for (int k = 0; k < g.z_samples; ++k) a0[k] = amp.A.at(4, 4, k);
    const double dz = g.dz();
    for (int k = 0; k < g.z_samples; ++k) {
        if (k == 0)
            d2[k] = (2.0 * a0[0] - 5.0 * a0[1] + 4.0 * a0[2] - a0[3]) / (dz * dz);
        else if (k == g.z_samples - 1)
            d2[k] = (2.0 * a0[k] - 5.0 * a0[k - 1] + 4.0 * a0[k - 2] - a0[k - 3]) / (dz * dz);
        else
            d2[k] = (a0[k + 1] - 2.0 * a0[k] + a0[k - 1]) / (dz * dz);
    }
    const auto interp = [&](const std::vector<double>& tab, double z) {
        const double f = std::min(std::max(z / dz, 0.0), g.z_samples - 1.000001);
        const int k0 = static_cast<int>(f);
        return tab[k0] + (f - k0) * (tab[k0 + 1] - tab[k0]);
    };
    // ds = n dz along the vertical ray
    const int fine = 16000;
    double acc = 0.0;
    std::vector<double> alpha_ref(g.z_samples, 0.0);
    int next_k = 1;
    const auto a0_of_z = [&](double z) {
        const auto st = oracle::layered_riccati(m, oracle::layered_tau(m, z, 400));
        return 0.5 * std::exp(-0.5 * st.amp_int);
    };
    double prev_f = 0.0, prev_z = 0.0;
    {
        const double n = eval_n(m, {0, 0, 0});
        prev_f = interp(d2, 0.0) / (n * n * interp(a0, 0.0)) * n;  // times dz-to-ds factor
    }
    for (int q = 1; q <= fine; ++q) {
        const double z = static_cast<double>(q) / fine;
        const double n = eval_n(m, {0, 0, z});
        const double f = interp(d2, z) / (n * n * interp(a0, z)) * n;
        acc += 0.5 * (f + prev_f) * (z - prev_z);
        prev_f = f;
        prev_z = z;
        while (next_k < g.z_samples && g.z(next_k) <= z + 1e-12) {
            alpha_ref[next_k] = 0.5 * a0_of_z(g.z(next_k)) * acc;
            ++next_k;
        }
    }
    for (int k = 2; k < g.z_samples; k += 6) {
        CHECK(amp.alphas[0].at(4, 4, k) ==
              doctest::Approx(alpha_ref[k]).epsilon(2e-3).scale(1e-3));
    }
}

TEST_CASE("regularity: constant medium has unit shooting determinant") {
    const RegularityReport rep = check_regularity(MediumSpec::constant(), 0.8, 5, 1.0);
    CHECK(rep.pass);
    CHECK(rep.min_det == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("regularity: weak bump passes, hard focusing bump fails") {
    const RegularityReport weak = check_regularity(MediumSpec::bump(0.05), 0.8, 7, 1.1);
    CHECK(weak.pass);
    CHECK(weak.min_det > 0.5);

    // a strong, narrow lens drives rays across the axis within reach
    MediumSpec strong = MediumSpec::bump(0.9, 0.15, 0.7, 2.0, 16.0);
    ShootingOptions opts;
    opts.kappa_cap = 1e6;  // let the focusing develop rather than trip the cap
    const RegularityReport rep = check_regularity(strong, 0.5, 7, 1.9, opts);
    CHECK_FALSE(rep.pass);
    CHECK(rep.min_det < 0.25);
    CHECK(rep.worst_s > 0.0);
}
