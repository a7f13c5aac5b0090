#include "pwcip/medium.hpp"

#include <algorithm>
#include <cmath>

namespace pwcip {

double smoothstep(double z) {
    if (z <= 0.0) return 0.0;
    if (z >= 1.0) return 1.0;
    return z * z * z * (10.0 + z * (-15.0 + 6.0 * z));
}

double smoothstep_d1(double z) {
    if (z <= 0.0 || z >= 1.0) return 0.0;
    return z * z * (30.0 + z * (-60.0 + 30.0 * z));
}

double smoothstep_d2(double z) {
    if (z <= 0.0 || z >= 1.0) return 0.0;
    return z * (60.0 + z * (-180.0 + 120.0 * z));
}

namespace {

// transverse window: 1 on [-inner, inner], 0 beyond outer, smoothstep between
struct Window {
    double inner, outer;

    double val(double x) const {
        const double a = std::abs(x);
        if (a <= inner) return 1.0;
        if (a >= outer) return 0.0;
        return smoothstep((outer - a) / (outer - inner));
    }
    double d1(double x) const {
        const double a = std::abs(x);
        if (a <= inner || a >= outer) return 0.0;
        const double w = outer - inner;
        const double sgn = x >= 0.0 ? 1.0 : -1.0;
        return -sgn / w * smoothstep_d1((outer - a) / w);
    }
    double d2(double x) const {
        const double a = std::abs(x);
        if (a <= inner || a >= outer) return 0.0;
        const double w = outer - inner;
        return smoothstep_d2((outer - a) / w) / (w * w);
    }
};

}  // namespace

double eval_n(const MediumSpec& m, const Vec3& x) {
    if (m.model == MediumModel::Constant) return 1.0;
    const double s = smoothstep(x.z);
    if (m.model == MediumModel::Layered) return 1.0 + m.amplitude * s;
    const Window w{m.window_inner, m.window_outer};
    return 1.0 + m.amplitude * s * w.val(x.x) * w.val(x.y);
}

Vec3 eval_grad_n(const MediumSpec& m, const Vec3& x) {
    if (m.model == MediumModel::Constant) return {};
    const double s = smoothstep(x.z), s1 = smoothstep_d1(x.z);
    if (m.model == MediumModel::Layered) return {0.0, 0.0, m.amplitude * s1};
    const Window w{m.window_inner, m.window_outer};
    const double qx = w.val(x.x), qy = w.val(x.y);
    return {m.amplitude * s * w.d1(x.x) * qy, m.amplitude * s * qx * w.d1(x.y),
            m.amplitude * s1 * qx * qy};
}

Mat3 eval_hess_n(const MediumSpec& m, const Vec3& x) {
    Mat3 H;
    if (m.model == MediumModel::Constant) return H;
    const double s = smoothstep(x.z), s1 = smoothstep_d1(x.z), s2 = smoothstep_d2(x.z);
    if (m.model == MediumModel::Layered) {
        H(2, 2) = m.amplitude * s2;
        return H;
    }
    const Window w{m.window_inner, m.window_outer};
    const double qx = w.val(x.x), qy = w.val(x.y);
    const double qx1 = w.d1(x.x), qy1 = w.d1(x.y);
    H(0, 0) = m.amplitude * s * w.d2(x.x) * qy;
    H(1, 1) = m.amplitude * s * qx * w.d2(x.y);
    H(2, 2) = m.amplitude * s2 * qx * qy;
    H(0, 1) = H(1, 0) = m.amplitude * s * qx1 * qy1;
    H(0, 2) = H(2, 0) = m.amplitude * s1 * qx1 * qy;
    H(1, 2) = H(2, 1) = m.amplitude * s1 * qx * qy1;
    return H;
}

namespace {

struct Extremum {
    double worst = 0.0;
    Vec3 at;
    void track_max(double v, const Vec3& x) {
        if (v > worst) { worst = v; at = x; }
    }
};

}  // namespace

MediumReport validate_medium(const MediumSpec& m, int sample_density) {
    if (sample_density < 8)
        throw ValidationFailure("sample_density must be at least 8 per unit length");

    MediumReport rep;
    rep.diagnostic_mode = (m.model == MediumModel::Layered);

    const double tol = 1e-12;
    const double xr = 1.25 * m.X;          // transverse sampling range
    const double zlo = -0.5, zhi = 1.25;   // covers below-plane and plateau

    const int nx = std::max(3, static_cast<int>(std::ceil(2.0 * xr * sample_density)) + 1);
    const int nz = std::max(3, static_cast<int>(std::ceil((zhi - zlo) * sample_density)) + 1);

    MediumCheck range{"value-range"}, support_z{"unit-below-plane"},
        support_xy{"transverse-support"}, c2{"c2-bound"}, mono{"monotone-z"},
        flat{"flat-at-plane"};
    support_xy.waived = rep.diagnostic_mode;
    if (support_xy.waived) support_xy.detail = "layered profile: transverse support waived (diagnostic mode)";

    Extremum e_range, e_c2, e_mono, e_flat, e_sz, e_sxy;

    for (int a = 0; a < nx; ++a)
        for (int b = 0; b < nx; ++b)
            for (int c = 0; c < nz; ++c) {
                const Vec3 x{-xr + 2.0 * xr * a / (nx - 1), -xr + 2.0 * xr * b / (nx - 1),
                             zlo + (zhi - zlo) * c / (nz - 1)};
                const double n = eval_n(m, x);
                const Vec3 g = eval_grad_n(m, x);
                const Mat3 H = eval_hess_n(m, x);

                e_range.track_max(std::max(1.0 - n, n - m.n0), x);
                if (x.z <= 0.0) e_sz.track_max(std::abs(n - 1.0), x);
                if (std::max(std::abs(x.x), std::abs(x.y)) >= m.X)
                    e_sxy.track_max(std::abs(n - 1.0), x);
                double dmax = n;
                for (int i = 0; i < 3; ++i) {
                    dmax = std::max(dmax, std::abs(g[i]));
                    for (int j = 0; j < 3; ++j) dmax = std::max(dmax, std::abs(H(i, j)));
                }
                e_c2.track_max(dmax - m.n00, x);
                if (m.monotone_z) e_mono.track_max(-g.z, x);
                if (std::abs(x.z) < 0.5 / sample_density) {
                    const Vec3 x0{x.x, x.y, 0.0};
                    e_flat.track_max(std::abs(eval_grad_n(m, x0).z), x0);
                }
            }

    range.pass = e_range.worst <= tol;
    range.worst = e_range.worst;
    range.worst_at = e_range.at;
    range.detail = "max of (1 - n, n - n0) over samples";

    support_z.pass = e_sz.worst <= tol;
    support_z.worst = e_sz.worst;
    support_z.worst_at = e_sz.at;

    support_xy.pass = e_sxy.worst <= tol;
    support_xy.worst = e_sxy.worst;
    support_xy.worst_at = e_sxy.at;

    c2.pass = e_c2.worst <= tol;
    c2.worst = e_c2.worst;
    c2.worst_at = e_c2.at;
    c2.detail = "max of (|n|,|dn|,|d2n|) - n00 over samples";

    mono.pass = !m.monotone_z || e_mono.worst <= tol;
    mono.worst = e_mono.worst;
    mono.worst_at = e_mono.at;

    flat.pass = e_flat.worst <= tol;
    flat.worst = e_flat.worst;
    flat.worst_at = e_flat.at;

    // declared class constants must be ordered
    MediumCheck consts{"class-constants"};
    consts.pass = (m.model == MediumModel::Constant) ? (m.n0 >= 1.0 && m.n00 > m.n0)
                                                     : (1.0 < m.n0 && m.n0 < m.n00);
    consts.detail = "requires 1 < n0 < n00";

    rep.checks = {range, support_z, support_xy, c2, mono, flat, consts};
    return rep;
}

void require_valid(const MediumSpec& m, int sample_density) {
    const MediumReport rep = validate_medium(m, sample_density);
    for (const auto& c : rep.checks)
        if (!c.pass && !c.waived)
            throw ValidationFailure("medium check '" + c.name + "' failed (worst " +
                                    std::to_string(c.worst) + " at [" +
                                    std::to_string(c.worst_at.x) + ", " +
                                    std::to_string(c.worst_at.y) + ", " +
                                    std::to_string(c.worst_at.z) + "])");
}

}  // namespace pwcip
