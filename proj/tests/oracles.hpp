#pragma once

// Test-only oracles, kept independent of the library's integration paths:
// plain Simpson quadrature, a 1-D travel-time integral for layered profiles,
// and a scalar Riccati integrator for the on-axis curvature of such profiles.

#include <cmath>
#include <functional>
#include <vector>

#include "pwcip/medium.hpp"

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// vertical optical path of a transversely flat profile: tau(z) = int_0^z n
inline double layered_tau(const pwcip::MediumSpec& m, double z, int panels = 20000) {
    return simpson([&](double zz) { return pwcip::eval_n(m, {0.0, 0.0, zz}); }, 0.0, z, panels);
}

// On-axis curvature of a layered profile: only the zz component is active and
// solves dk/ds = (n_z^2 + n n_zz - k^2)/n^2 with dz/ds = 1/n. RK4 in s.
struct ScalarRiccati {
    double z = 0.0, k = 0.0, amp_int = 0.0;  // amp_int accumulates k / n^2
};

inline ScalarRiccati layered_riccati(const pwcip::MediumSpec& m, double s_end, double ds = 2.5e-4) {
    struct D { double dz, dk, da; };
    const auto rhs = [&](const ScalarRiccati& st) -> D {
        const double n = pwcip::eval_n(m, {0.0, 0.0, st.z});
        const double nz = pwcip::eval_grad_n(m, {0.0, 0.0, st.z}).z;
        const double nzz = pwcip::eval_hess_n(m, {0.0, 0.0, st.z})(2, 2);
        return {1.0 / n, (nz * nz + n * nzz - st.k * st.k) / (n * n), st.k / (n * n)};
    };
    ScalarRiccati st;
    double s = 0.0;
    while (s < s_end - 1e-15) {
        const double h = std::min(ds, s_end - s);
        const D k1 = rhs(st);
        const D k2 = rhs({st.z + 0.5 * h * k1.dz, st.k + 0.5 * h * k1.dk, 0.0});
        const D k3 = rhs({st.z + 0.5 * h * k2.dz, st.k + 0.5 * h * k2.dk, 0.0});
        const D k4 = rhs({st.z + h * k3.dz, st.k + h * k3.dk, 0.0});
        st.z += h / 6.0 * (k1.dz + 2.0 * (k2.dz + k3.dz) + k4.dz);
        st.k += h / 6.0 * (k1.dk + 2.0 * (k2.dk + k3.dk) + k4.dk);
        st.amp_int += h / 6.0 * (k1.da + 2.0 * (k2.da + k3.da) + k4.da);
        s += h;
    }
    return st;
}

// solves int_0^z n = s_target for z (bisection; layered profiles only)
inline double layered_z_of_s(const pwcip::MediumSpec& m, double s_target) {
    double lo = 0.0, hi = s_target;  // n >= 1 implies z <= s
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (layered_tau(m, mid, 2000) < s_target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace oracle
