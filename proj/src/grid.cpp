#include "pwcip/grid.hpp"

#include <algorithm>
#include <cmath>

namespace pwcip {

SemiDiscreteField make_field(const GridSpec& g, int nt,
                             const std::function<double(double, double, double, double)>& f) {
    SemiDiscreteField out(g, nt);
    for (int i = 0; i < out.ni; ++i)
        for (int j = 0; j < out.nj; ++j)
            for (int k = 0; k < out.nz; ++k)
                for (int l = 0; l < nt; ++l)
                    out.at(i, j, k, l) = f(g.x(i), g.y(j), g.z(k), g.t(l));
    return out;
}

SemiDiscreteField make_static_field(const GridSpec& g,
                                    const std::function<double(double, double, double)>& f) {
    SemiDiscreteField out(g, 1);
    for (int i = 0; i < out.ni; ++i)
        for (int j = 0; j < out.nj; ++j)
            for (int k = 0; k < out.nz; ++k) out.at(i, j, k) = f(g.x(i), g.y(j), g.z(k));
    return out;
}

GammaTrace extract_gamma(const SemiDiscreteField& f) {
    GammaTrace g(f.grid, f.nt);
    for (int i = 1; i <= f.grid.n; ++i)
        for (int j = 1; j <= f.grid.n; ++j)
            for (int l = 0; l < f.nt; ++l) g.at(i, j, l) = f.at(i, j, 0, l);
    return g;
}

ThetaTrace extract_theta(const SemiDiscreteField& f) {
    ThetaTrace g(f.grid, f.nt);
    const int nb = f.grid.n + 1;
    for (int m = 0; m < g.nm; ++m)
        for (int k = 0; k < f.nz; ++k)
            for (int l = 0; l < f.nt; ++l) {
                g.at(0, m, k, l) = f.at(0, m, k, l);
                g.at(1, m, k, l) = f.at(nb, m, k, l);
                g.at(2, m, k, l) = f.at(m, 0, k, l);
                g.at(3, m, k, l) = f.at(m, nb, k, l);
            }
    return g;
}

// --- transverse stencils ----------------------------------------------------

SemiDiscreteField op_dx(const SemiDiscreteField& f) {
    SemiDiscreteField out(f.grid, f.nt);
    const double c = 1.0 / (2.0 * f.grid.h());
    for (int i = 1; i <= f.grid.n; ++i)
        for (int j = 1; j <= f.grid.n; ++j)
            for (int k = 0; k < f.nz; ++k)
                for (int l = 0; l < f.nt; ++l)
                    out.at(i, j, k, l) = c * (f.at(i + 1, j, k, l) - f.at(i - 1, j, k, l));
    return out;
}

SemiDiscreteField op_dy(const SemiDiscreteField& f) {
    SemiDiscreteField out(f.grid, f.nt);
    const double c = 1.0 / (2.0 * f.grid.h());
    for (int i = 1; i <= f.grid.n; ++i)
        for (int j = 1; j <= f.grid.n; ++j)
            for (int k = 0; k < f.nz; ++k)
                for (int l = 0; l < f.nt; ++l)
                    out.at(i, j, k, l) = c * (f.at(i, j + 1, k, l) - f.at(i, j - 1, k, l));
    return out;
}

SemiDiscreteField op_dxx(const SemiDiscreteField& f) {
    SemiDiscreteField out(f.grid, f.nt);
    const double c = 1.0 / (f.grid.h() * f.grid.h());
    for (int i = 1; i <= f.grid.n; ++i)
        for (int j = 1; j <= f.grid.n; ++j)
            for (int k = 0; k < f.nz; ++k)
                for (int l = 0; l < f.nt; ++l)
                    out.at(i, j, k, l) = c * (f.at(i + 1, j, k, l) - 2.0 * f.at(i, j, k, l) +
                                              f.at(i - 1, j, k, l));
    return out;
}

SemiDiscreteField op_dyy(const SemiDiscreteField& f) {
    SemiDiscreteField out(f.grid, f.nt);
    const double c = 1.0 / (f.grid.h() * f.grid.h());
    for (int i = 1; i <= f.grid.n; ++i)
        for (int j = 1; j <= f.grid.n; ++j)
            for (int k = 0; k < f.nz; ++k)
                for (int l = 0; l < f.nt; ++l)
                    out.at(i, j, k, l) = c * (f.at(i, j + 1, k, l) - 2.0 * f.at(i, j, k, l) +
                                              f.at(i, j - 1, k, l));
    return out;
}

// --- 1-D stencils along the continuous axes ---------------------------------
// Four (index, coeff) taps per output point cover both the centered interior
// stencils and the second-order one-sided closures.

namespace {

struct Taps {
    int idx[4];
    double c[4];
    int m;  // taps used
};

// first derivative on m samples with spacing d
inline Taps d1_taps(int k, int m, double d) {
    Taps t{};
    if (k == 0) {
        t = {{0, 1, 2, 0}, {-1.5 / d, 2.0 / d, -0.5 / d, 0.0}, 3};
    } else if (k == m - 1) {
        t = {{m - 1, m - 2, m - 3, 0}, {1.5 / d, -2.0 / d, 0.5 / d, 0.0}, 3};
    } else {
        t = {{k - 1, k + 1, 0, 0}, {-0.5 / d, 0.5 / d, 0.0, 0.0}, 2};
    }
    return t;
}

// second derivative on m samples with spacing d
inline Taps d2_taps(int k, int m, double d) {
    const double c = 1.0 / (d * d);
    Taps t{};
    if (k == 0) {
        t = {{0, 1, 2, 3}, {2.0 * c, -5.0 * c, 4.0 * c, -1.0 * c}, 4};
    } else if (k == m - 1) {
        t = {{m - 1, m - 2, m - 3, m - 4}, {2.0 * c, -5.0 * c, 4.0 * c, -1.0 * c}, 4};
    } else {
        t = {{k - 1, k, k + 1, 0}, {c, -2.0 * c, c, 0.0}, 3};
    }
    return t;
}

enum class Axis { Z, T };

template <typename TapFn>
SemiDiscreteField apply_axis(const SemiDiscreteField& f, Axis ax, TapFn taps, bool adjoint) {
    SemiDiscreteField out(f.grid, f.nt);
    const int m = (ax == Axis::Z) ? f.nz : f.nt;
    const double d = (ax == Axis::Z) ? f.grid.dz() : f.grid.dt();
    if (m < 4) throw DomainMismatch("axis too short for difference stencils");
    for (int i = 0; i < f.ni; ++i)
        for (int j = 0; j < f.nj; ++j) {
            if (ax == Axis::Z) {
                for (int l = 0; l < f.nt; ++l)
                    for (int k = 0; k < m; ++k) {
                        const Taps tp = taps(k, m, d);
                        if (!adjoint) {
                            double s = 0.0;
                            for (int q = 0; q < tp.m; ++q) s += tp.c[q] * f.at(i, j, tp.idx[q], l);
                            out.at(i, j, k, l) = s;
                        } else {
                            const double g = f.at(i, j, k, l);
                            for (int q = 0; q < tp.m; ++q) out.at(i, j, tp.idx[q], l) += tp.c[q] * g;
                        }
                    }
            } else {
                for (int k = 0; k < f.nz; ++k)
                    for (int l = 0; l < m; ++l) {
                        const Taps tp = taps(l, m, d);
                        if (!adjoint) {
                            double s = 0.0;
                            for (int q = 0; q < tp.m; ++q) s += tp.c[q] * f.at(i, j, k, tp.idx[q]);
                            out.at(i, j, k, l) = s;
                        } else {
                            const double g = f.at(i, j, k, l);
                            for (int q = 0; q < tp.m; ++q) out.at(i, j, k, tp.idx[q]) += tp.c[q] * g;
                        }
                    }
            }
        }
    return out;
}

}  // namespace

SemiDiscreteField op_dz(const SemiDiscreteField& f) { return apply_axis(f, Axis::Z, d1_taps, false); }
SemiDiscreteField op_dzz(const SemiDiscreteField& f) { return apply_axis(f, Axis::Z, d2_taps, false); }
SemiDiscreteField op_dt(const SemiDiscreteField& f) { return apply_axis(f, Axis::T, d1_taps, false); }
SemiDiscreteField op_dzt(const SemiDiscreteField& f) { return op_dz(op_dt(f)); }

SemiDiscreteField laplacian_h(const SemiDiscreteField& f) {
    SemiDiscreteField out = op_dzz(f);
    const SemiDiscreteField fxx = op_dxx(f), fyy = op_dyy(f);
    // transverse parts exist at interior i,j only; keep the pure z part on the
    // boundary layers zeroed to match the interior-only domain of the operator
    SemiDiscreteField r(f.grid, f.nt);
    for (int i = 1; i <= f.grid.n; ++i)
        for (int j = 1; j <= f.grid.n; ++j)
            for (int k = 0; k < f.nz; ++k)
                for (int l = 0; l < f.nt; ++l)
                    r.at(i, j, k, l) = fxx.at(i, j, k, l) + fyy.at(i, j, k, l) + out.at(i, j, k, l);
    return r;
}

std::array<SemiDiscreteField, 3> grad_h(const SemiDiscreteField& f) {
    return {op_dx(f), op_dy(f), op_dz(f)};
}

// --- adjoints ----------------------------------------------------------------

SemiDiscreteField adj_dx(const SemiDiscreteField& g) {
    SemiDiscreteField out(g.grid, g.nt);
    const double c = 1.0 / (2.0 * g.grid.h());
    for (int i = 1; i <= g.grid.n; ++i)
        for (int j = 1; j <= g.grid.n; ++j)
            for (int k = 0; k < g.nz; ++k)
                for (int l = 0; l < g.nt; ++l) {
                    const double gv = g.at(i, j, k, l);
                    out.at(i + 1, j, k, l) += c * gv;
                    out.at(i - 1, j, k, l) -= c * gv;
                }
    return out;
}

SemiDiscreteField adj_dy(const SemiDiscreteField& g) {
    SemiDiscreteField out(g.grid, g.nt);
    const double c = 1.0 / (2.0 * g.grid.h());
    for (int i = 1; i <= g.grid.n; ++i)
        for (int j = 1; j <= g.grid.n; ++j)
            for (int k = 0; k < g.nz; ++k)
                for (int l = 0; l < g.nt; ++l) {
                    const double gv = g.at(i, j, k, l);
                    out.at(i, j + 1, k, l) += c * gv;
                    out.at(i, j - 1, k, l) -= c * gv;
                }
    return out;
}

SemiDiscreteField adj_dxx(const SemiDiscreteField& g) {
    SemiDiscreteField out(g.grid, g.nt);
    const double c = 1.0 / (g.grid.h() * g.grid.h());
    for (int i = 1; i <= g.grid.n; ++i)
        for (int j = 1; j <= g.grid.n; ++j)
            for (int k = 0; k < g.nz; ++k)
                for (int l = 0; l < g.nt; ++l) {
                    const double gv = g.at(i, j, k, l);
                    out.at(i + 1, j, k, l) += c * gv;
                    out.at(i, j, k, l) -= 2.0 * c * gv;
                    out.at(i - 1, j, k, l) += c * gv;
                }
    return out;
}

SemiDiscreteField adj_dyy(const SemiDiscreteField& g) {
    SemiDiscreteField out(g.grid, g.nt);
    const double c = 1.0 / (g.grid.h() * g.grid.h());
    for (int i = 1; i <= g.grid.n; ++i)
        for (int j = 1; j <= g.grid.n; ++j)
            for (int k = 0; k < g.nz; ++k)
                for (int l = 0; l < g.nt; ++l) {
                    const double gv = g.at(i, j, k, l);
                    out.at(i, j + 1, k, l) += c * gv;
                    out.at(i, j, k, l) -= 2.0 * c * gv;
                    out.at(i, j - 1, k, l) += c * gv;
                }
    return out;
}

SemiDiscreteField adj_dz(const SemiDiscreteField& g) { return apply_axis(g, Axis::Z, d1_taps, true); }
SemiDiscreteField adj_dzz(const SemiDiscreteField& g) { return apply_axis(g, Axis::Z, d2_taps, true); }
SemiDiscreteField adj_dt(const SemiDiscreteField& g) { return apply_axis(g, Axis::T, d1_taps, true); }

// --- norms --------------------------------------------------------------------

namespace {

// sum over interior transverse nodes with weight h^2 of the z(,t)-trapezoid
// integral of a node-wise integrand
template <typename F>
double volume_sum(const SemiDiscreteField& f, bool with_t, F integrand) {
    const GridSpec& g = f.grid;
    const double h2 = g.h() * g.h();
    double total = 0.0;
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j)
            for (int k = 0; k < f.nz; ++k) {
                const double wz = trapz_w(k, f.nz) * g.dz();
                if (with_t) {
                    for (int l = 0; l < f.nt; ++l)
                        total += h2 * wz * trapz_w(l, f.nt) * g.dt() * integrand(i, j, k, l);
                } else {
                    total += h2 * wz * integrand(i, j, k, 0);
                }
            }
    return total;
}

}  // namespace

double norm_sq(const SemiDiscreteField& f, Norm which) {
    switch (which) {
        case Norm::L2h_Omega: {
            if (!f.is_static()) throw DomainMismatch("L2h(Omega) expects a static field");
            return volume_sum(f, false, [&](int i, int j, int k, int) {
                const double s = f.at(i, j, k);
                return s * s;
            });
        }
        case Norm::H1h_Omega: {
            if (!f.is_static()) throw DomainMismatch("H1h(Omega) expects a static field");
            const SemiDiscreteField fz = op_dz(f);
            return volume_sum(f, false, [&](int i, int j, int k, int) {
                const double s = f.at(i, j, k), sz = fz.at(i, j, k);
                return s * s + sz * sz;
            });
        }
        case Norm::H2h_Q: {
            if (f.is_static()) throw DomainMismatch("H2h(Q) expects a time-dependent field");
            const SemiDiscreteField fz = op_dz(f), fzz = op_dzz(f), ft = op_dt(f),
                                    fzt = op_dzt(f);
            // the squared value appears in both brackets of the definition,
            // hence the coefficient 2 on s^2
            return volume_sum(f, true, [&](int i, int j, int k, int l) {
                const double s = f.at(i, j, k, l), sz = fz.at(i, j, k, l),
                             szz = fzz.at(i, j, k, l), st = ft.at(i, j, k, l),
                             szt = fzt.at(i, j, k, l);
                return 2.0 * s * s + sz * sz + szz * szz + szt * szt + st * st;
            });
        }
        case Norm::H1h_Q: {
            if (f.is_static()) throw DomainMismatch("H1h(Q) expects a time-dependent field");
            return norm_sq_H1h_Q_window(f, f.grid.T1);
        }
        case Norm::C2h: {
            if (f.is_static()) throw DomainMismatch("C2h expects a time-dependent field");
            const SemiDiscreteField fz = op_dz(f), fzz = op_dzz(f), fzt = op_dzt(f);
            return std::max({max_abs(f), max_abs(fz), max_abs(fzz), max_abs(fzt)});
        }
        case Norm::Cnh: {
            if (!f.is_static()) throw DomainMismatch("Cnh expects a static field");
            const SemiDiscreteField fz = op_dz(f), fzz = op_dzz(f);
            return std::max({max_abs(f), max_abs(fz), max_abs(fzz)});
        }
    }
    throw DomainMismatch("unknown norm");
}

double norm_sq_H1h_Q_window(const SemiDiscreteField& f, double t_max) {
    if (f.is_static()) throw DomainMismatch("H1h(Q) expects a time-dependent field");
    if (t_max > f.grid.T1 + 1e-12) throw DomainMismatch("norm window exceeds field horizon");
    // integrate t over samples up to t_max (window boundary snapped to grid)
    int lmax = 0;
    for (int l = 0; l < f.nt; ++l)
        if (f.grid.t(l) <= t_max + 1e-12) lmax = l;
    const SemiDiscreteField fz = op_dz(f), ft = op_dt(f);
    const GridSpec& g = f.grid;
    const double h2 = g.h() * g.h();
    double total = 0.0;
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j)
            for (int k = 0; k < f.nz; ++k) {
                const double wz = trapz_w(k, f.nz) * g.dz();
                for (int l = 0; l <= lmax; ++l) {
                    const double wt = trapz_w(l, lmax + 1) * g.dt();
                    const double s = f.at(i, j, k, l), sz = fz.at(i, j, k, l),
                                 st = ft.at(i, j, k, l);
                    total += h2 * wz * wt * (s * s + sz * sz + st * st);
                }
            }
    return total;
}

namespace {

// trace time derivative with the same stencils as the volume operators
double gamma_dt(const GammaTrace& g, int i, int j, int l) {
    const double d = g.dt;
    if (l == 0) return (-1.5 * g.at(i, j, 0) + 2.0 * g.at(i, j, 1) - 0.5 * g.at(i, j, 2)) / d;
    if (l == g.nt - 1)
        return (1.5 * g.at(i, j, l) - 2.0 * g.at(i, j, l - 1) + 0.5 * g.at(i, j, l - 2)) / d;
    return (g.at(i, j, l + 1) - g.at(i, j, l - 1)) / (2.0 * d);
}

}  // namespace

double norm_sq_H1h_Gamma(const GammaTrace& g) {
    const double h2 = g.grid.h() * g.grid.h();
    double total = 0.0;
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j)
            for (int l = 0; l < g.nt; ++l) {
                const double wt = trapz_w(l, g.nt) * g.dt;
                const double s = g.at(i, j, l), st = gamma_dt(g, i, j, l);
                total += h2 * wt * (s * s + st * st);
            }
    return total;
}

double norm_sq_L2h_Gamma(const GammaTrace& g) {
    const double h = g.grid.h();
    double total = 0.0;
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j)
            for (int l = 0; l < g.nt; ++l) {
                const double wt = trapz_w(l, g.nt) * g.dt;
                total += h * wt * g.at(i, j, l) * g.at(i, j, l);
            }
    return total;
}

double norm_sq_L2h_Theta(const ThetaTrace& g) {
    const double h = g.grid.h();
    double total = 0.0;
    for (int face = 0; face < 4; ++face)
        for (int m = 0; m < g.nm; ++m)
            for (int k = 0; k < g.nz; ++k) {
                const double wz = trapz_w(k, g.nz) * g.grid.dz();
                for (int l = 0; l < g.nt; ++l) {
                    const double wt = trapz_w(l, g.nt) * g.dt;
                    total += h * wz * wt * g.at(face, m, k, l) * g.at(face, m, k, l);
                }
            }
    return total;
}

double norm_sq_L2h_Theta_static(const ThetaTrace& g) {
    if (g.nt != 1) throw DomainMismatch("static lateral norm expects nt == 1");
    const double h = g.grid.h();
    double total = 0.0;
    for (int face = 0; face < 4; ++face)
        for (int m = 0; m < g.nm; ++m)
            for (int k = 0; k < g.nz; ++k) {
                const double wz = trapz_w(k, g.nz) * g.grid.dz();
                total += h * wz * g.at(face, m, k) * g.at(face, m, k);
            }
    return total;
}

double max_abs(const SemiDiscreteField& f) {
    double r = 0.0;
    for (double s : f.v) r = std::max(r, std::abs(s));
    return r;
}

}  // namespace pwcip
