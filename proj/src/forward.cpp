#include "pwcip/forward.hpp"

#include <algorithm>
#include <cmath>

namespace pwcip {

namespace {

inline double heaviside_poly(double dt_front, int k) {
    // (t - tau)^k / k! for t >= tau, with H(0) = 1
    if (dt_front < 0.0) return 0.0;
    double f = 1.0;
    for (int q = 1; q <= k; ++q) f *= dt_front / q;
    return f;
}

// uniform-grid cubic interpolation (4-point Lagrange, stencil clamped at the
// ends); tables are per-node time traces
double interp_cubic(const double* tab, int n, double dt, double tq) {
    const double f = std::min(std::max(tq / dt, 0.0), static_cast<double>(n - 1));
    int m = static_cast<int>(std::floor(f));
    m = std::min(std::max(m - 1, 0), n - 4);
    const double u = f - m;
    // Lagrange weights on nodes m..m+3
    const double w0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
    const double w1 = u * (u - 2.0) * (u - 3.0) / 2.0;
    const double w2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
    const double w3 = u * (u - 1.0) * (u - 2.0) / 6.0;
    return w0 * tab[m] + w1 * tab[m + 1] + w2 * tab[m + 2] + w3 * tab[m + 3];
}

}  // namespace

WaveField optics_forward([[maybe_unused]] const MediumSpec& m, const GridSpec& g,
                         const TravelTimeField& tt, const AmplitudeField& amp, double T,
                         int nt_wave) {
    if (nt_wave <= 0) nt_wave = static_cast<int>(std::lround(T / g.dt())) + 1;
    WaveField wf;
    wf.grid = g;
    wf.T = T;
    wf.nt = nt_wave;
    wf.eps = 0.0;
    wf.provenance = Provenance::Optics;
    wf.u = SemiDiscreteField(g, nt_wave);
    wf.has_expansion = true;
    wf.tau = tt.tau;
    wf.alphas.push_back(amp.A);
    for (const auto& a : amp.alphas) wf.alphas.push_back(a);

    const double dtw = wf.wave_dt();
    for (int i = 0; i < wf.u.ni; ++i)
        for (int j = 0; j < wf.u.nj; ++j)
            for (int k = 0; k < wf.u.nz; ++k) {
                const double front = tt.tau.at(i, j, k);
                for (int l = 0; l < nt_wave; ++l) {
                    const double dtf = l * dtw - front;
                    double val = 0.0;
                    for (size_t q = 0; q < wf.alphas.size(); ++q)
                        val += wf.alphas[q].at(i, j, k) * heaviside_poly(dtf, static_cast<int>(q));
                    wf.u.at(i, j, k, l) = val;
                }
            }
    return wf;
}

CipData extract_cip_data(const WaveField& field) {
    const GridSpec& g = field.grid;
    CipData cip;
    cip.grid = g;
    cip.T = field.T;
    cip.nt = field.nt;
    cip.f0 = GammaTrace(g, field.nt, field.wave_dt());
    cip.f1 = GammaTrace(g, field.nt, field.wave_dt());
    cip.f2 = ThetaTrace(g, field.nt, field.wave_dt());
    const double dtw = field.wave_dt();

    // traces of u itself
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j)
            for (int l = 0; l < field.nt; ++l) cip.f0.at(i, j, l) = field.u.at(i, j, 0, l);
    const int nb = g.n + 1;
    for (int m = 0; m < g.n + 2; ++m)
        for (int k = 0; k < g.z_samples; ++k)
            for (int l = 0; l < field.nt; ++l) {
                cip.f2.at(0, m, k, l) = field.u.at(0, m, k, l);
                cip.f2.at(1, m, k, l) = field.u.at(nb, m, k, l);
                cip.f2.at(2, m, k, l) = field.u.at(m, 0, k, l);
                cip.f2.at(3, m, k, l) = field.u.at(m, nb, k, l);
            }

    // normal derivative at z = 0
    if (field.has_expansion) {
        // d/dz of the expansion at the plane: the front factors are constant
        // there, so only the coefficient derivatives survive for t > 0
        std::vector<GammaTrace> dz_alpha;
        const double dz = g.dz();
        for (const auto& a : field.alphas) {
            GammaTrace d(g, 1);
            for (int i = 1; i <= g.n; ++i)
                for (int j = 1; j <= g.n; ++j)
                    d.at(i, j) = (-1.5 * a.at(i, j, 0) + 2.0 * a.at(i, j, 1) -
                                  0.5 * a.at(i, j, 2)) / dz;
            dz_alpha.push_back(d);
        }
        for (int i = 1; i <= g.n; ++i)
            for (int j = 1; j <= g.n; ++j)
                for (int l = 0; l < field.nt; ++l) {
                    double val = 0.0;
                    for (size_t q = 0; q < dz_alpha.size(); ++q)
                        val += dz_alpha[q].at(i, j) * heaviside_poly(l * dtw, static_cast<int>(q));
                    cip.f1.at(i, j, l) = val;
                }
    } else if (field.has_uz_trace) {
        cip.f1 = field.uz_gamma;
    } else {
        // one-sided difference on the sampled z-axis
        const double dz = g.dz();
        for (int i = 1; i <= g.n; ++i)
            for (int j = 1; j <= g.n; ++j)
                for (int l = 0; l < field.nt; ++l)
                    cip.f1.at(i, j, l) = (-1.5 * field.u.at(i, j, 0, l) +
                                          2.0 * field.u.at(i, j, 1, l) -
                                          0.5 * field.u.at(i, j, 2, l)) / dz;
    }
    return cip;
}

TransformedData transform_chain(const MediumSpec& m, const WaveField& wave, const CipData& cip,
                                const TravelTimeField& tt, double T) {
    const double T1 = T - m.n0;
    if (T1 <= 0.0)
        throw HorizonTooShort("horizon T=" + std::to_string(T) +
                              " does not exceed the travel-time bound n0=" + std::to_string(m.n0));
    GridSpec g = wave.grid;
    g.T1 = T1;
    g.t1 = std::min(g.t1, T1);

    TransformedData out;
    out.grid = g;
    out.A_floor = amplitude_floor(m.n0, m.n00);
    out.w = SemiDiscreteField(g, g.t_samples);
    out.g0 = GammaTrace(g, g.t_samples);
    out.g1 = GammaTrace(g, g.t_samples);
    out.g2 = ThetaTrace(g, g.t_samples);
    out.tau_theta = extract_theta(tt.tau);

    const double dt_out = g.dt();

    if (wave.has_expansion) {
        // front-relative time shift is exact on the expansion: the shifted and
        // differentiated chain collapses to w(x, t) = sum_k alpha_k(x) t^k/k!
        for (int i = 0; i < out.w.ni; ++i)
            for (int j = 0; j < out.w.nj; ++j)
                for (int k = 0; k < out.w.nz; ++k)
                    for (int l = 0; l < g.t_samples; ++l) {
                        double val = 0.0;
                        for (size_t q = 0; q < wave.alphas.size(); ++q)
                            val += wave.alphas[q].at(i, j, k) *
                                   heaviside_poly(l * dt_out, static_cast<int>(q));
                        out.w.at(i, j, k, l) = val;
                    }
    } else {
        // v = int_0^t u by cumulative trapezoid on the wave grid, shifted by
        // cubic interpolation, then differentiated on the output grid
        const double dtw = wave.wave_dt();
        SemiDiscreteField P(g, g.t_samples);
        std::vector<double> vtab(wave.nt);
        for (int i = 0; i < out.w.ni; ++i)
            for (int j = 0; j < out.w.nj; ++j)
                for (int k = 0; k < out.w.nz; ++k) {
                    vtab[0] = 0.0;
                    for (int l = 1; l < wave.nt; ++l)
                        vtab[l] = vtab[l - 1] + 0.5 * dtw * (wave.u.at(i, j, k, l - 1) +
                                                             wave.u.at(i, j, k, l));
                    const double shift = tt.tau.at(i, j, k);
                    for (int l = 0; l < g.t_samples; ++l)
                        P.at(i, j, k, l) =
                            interp_cubic(vtab.data(), wave.nt, dtw, l * dt_out + shift);
                }
        out.w = op_dt(P);
    }

    // boundary data from the measured traces; tau = 0 and dz tau = 1 at z=0
    const double dtw = wave.wave_dt();
    std::vector<double> tab(wave.nt);
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j) {
            for (int l = 0; l < wave.nt; ++l) tab[l] = cip.f0.at(i, j, l);
            for (int l = 0; l < g.t_samples; ++l)
                out.g0.at(i, j, l) = interp_cubic(tab.data(), wave.nt, dtw, l * dt_out);
        }
    // dt g0 by centered differences on the output trace, one-sided at the ends
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j)
            for (int l = 0; l < g.t_samples; ++l) {
                double dg;
                if (l == 0)
                    dg = (-1.5 * out.g0.at(i, j, 0) + 2.0 * out.g0.at(i, j, 1) -
                          0.5 * out.g0.at(i, j, 2)) / dt_out;
                else if (l == g.t_samples - 1)
                    dg = (1.5 * out.g0.at(i, j, l) - 2.0 * out.g0.at(i, j, l - 1) +
                          0.5 * out.g0.at(i, j, l - 2)) / dt_out;
                else
                    dg = (out.g0.at(i, j, l + 1) - out.g0.at(i, j, l - 1)) / (2.0 * dt_out);
                for (int q = 0; q < wave.nt; ++q) tab[q] = cip.f1.at(i, j, q);
                out.g1.at(i, j, l) =
                    interp_cubic(tab.data(), wave.nt, dtw, l * dt_out) + dg * 1.0;
            }

    // lateral data shifted by the local travel time
    if (wave.has_expansion) {
        const int nb = g.n + 1;
        for (int face = 0; face < 4; ++face)
            for (int mm = 0; mm < g.n + 2; ++mm)
                for (int k = 0; k < g.z_samples; ++k) {
                    int ii, jj;
                    switch (face) {
                        case 0: ii = 0; jj = mm; break;
                        case 1: ii = nb; jj = mm; break;
                        case 2: ii = mm; jj = 0; break;
                        default: ii = mm; jj = nb; break;
                    }
                    for (int l = 0; l < g.t_samples; ++l) {
                        double val = 0.0;
                        for (size_t q = 0; q < wave.alphas.size(); ++q)
                            val += wave.alphas[q].at(ii, jj, k) *
                                   heaviside_poly(l * dt_out, static_cast<int>(q));
                        out.g2.at(face, mm, k, l) = val;
                    }
                }
    } else {
        for (int face = 0; face < 4; ++face)
            for (int mm = 0; mm < g.n + 2; ++mm)
                for (int k = 0; k < g.z_samples; ++k) {
                    for (int l = 0; l < wave.nt; ++l) tab[l] = cip.f2.at(face, mm, k, l);
                    const double shift = out.tau_theta.at(face, mm, k);
                    for (int l = 0; l < g.t_samples; ++l)
                        out.g2.at(face, mm, k, l) =
                            interp_cubic(tab.data(), wave.nt, dtw, l * dt_out + shift);
                }
    }
    return out;
}

// --- time-domain solver -------------------------------------------------------

namespace {

// incident mollified plane wave and its derivatives; the source kernel is a
// gaussian of width eps/3 in both z and t, so the double convolution leaves
// ~1e-10 tails beyond 3 eps
struct IncidentWave {
    double sigma;

    explicit IncidentWave(double eps) : sigma(eps / 3.0) {}

    double cdf(double a) const { return 0.5 * std::erfc(-a / (sigma * std::sqrt(2.0))); }
    double pdf(double a) const {
        const double q = a / sigma;
        return std::exp(-0.5 * q * q) / (sigma * std::sqrt(2.0 * M_PI));
    }
    double dpdf(double a) const { return -a / (sigma * sigma) * pdf(a); }

    template <typename F>
    double quad(double z, double t, F inner) const {
        // 65-point Simpson over the kernel support; 5-sigma reach keeps the
        // truncated tail mass below 1e-6
        const int npts = 65;
        const double lo = -5.0 * sigma, hi = 5.0 * sigma;
        const double h = (hi - lo) / (npts - 1);
        double s = 0.0;
        for (int q = 0; q < npts; ++q) {
            const double zeta = lo + q * h;
            const double wgt = (q == 0 || q == npts - 1) ? 1.0 : (q % 2 ? 4.0 : 2.0);
            s += wgt * pdf(zeta) * inner(t - std::abs(z - zeta));
        }
        return 0.5 * s * h / 3.0;
    }

    double value(double z, double t) const {
        return quad(z, t, [&](double a) { return cdf(a); });
    }
    double d2t(double z, double t) const {
        return quad(z, t, [&](double a) { return dpdf(a); });
    }
};

}  // namespace

WaveField fdtd_forward(const MediumSpec& m, const GridSpec& g, const FdtdOptions& opts) {
    if (opts.cfl > 0.5 || opts.cfl <= 0.0)
        throw CFLViolation("cfl must lie in (0, 0.5], got " + std::to_string(opts.cfl));
    const double hs = opts.spacing;
    const double dt = opts.cfl * hs / std::sqrt(3.0);
    if (opts.eps < 3.0 * dt)
        throw ConfigError("mollification width eps must be at least 3 dt = " +
                          std::to_string(3.0 * dt));
    const int steps = static_cast<int>(std::ceil(opts.T / dt));
    const double pad = opts.pad > 0.0 ? opts.pad : 0.5 * opts.T + 3.0 * opts.eps + 2.0 * hs;

    const double Lx = hs * std::ceil((g.X + pad) / hs);
    const double z_lo = -hs * std::ceil(pad / hs);
    const double z_hi = 1.0 + hs * std::ceil(pad / hs);
    const int nx = static_cast<int>(std::lround(2.0 * Lx / hs)) + 1;
    const int nz = static_cast<int>(std::lround((z_hi - z_lo) / hs)) + 1;
    const size_t cells = static_cast<size_t>(nx) * nx * nz;
    if (cells * static_cast<size_t>(steps) > opts.budget_cap)
        throw BudgetExceeded("time-domain run needs " + std::to_string(cells) + " cells x " +
                             std::to_string(steps) + " steps, over the configured cap");

    const auto xf = [&](int i) { return -Lx + i * hs; };
    const auto zf = [&](int k) { return z_lo + k * hs; };
    const auto idx = [&](int i, int j, int k) {
        return (static_cast<size_t>(i) * nx + j) * nz + k;
    };

    // material and source factor
    std::vector<double> inv_n2(cells), src_fac(cells);
    bool any_source = false;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nx; ++j)
            for (int k = 0; k < nz; ++k) {
                const double n = eval_n(m, {xf(i), xf(j), zf(k)});
                inv_n2[idx(i, j, k)] = 1.0 / (n * n);
                src_fac[idx(i, j, k)] = 1.0 - n * n;
                any_source = any_source || n != 1.0;
            }

    const IncidentWave inc(opts.eps);

    std::vector<double> u_prev(cells, 0.0), u_curr(cells, 0.0), u_next(cells, 0.0);

    WaveField wf;
    wf.grid = g;
    wf.T = steps * dt;
    wf.nt = steps + 1;
    wf.eps = opts.eps;
    wf.provenance = Provenance::Fdtd;
    wf.u = SemiDiscreteField(g, wf.nt);
    wf.has_uz_trace = true;
    wf.uz_gamma = GammaTrace(g, wf.nt, dt);

    // scattered field sampled at the semi-discrete nodes by trilinear
    // interpolation from the solver grid
    const auto sample_sc = [&](const std::vector<double>& u, double x, double y, double z) {
        const double fi = (x + Lx) / hs, fj = (y + Lx) / hs, fk = (z - z_lo) / hs;
        const int i0 = std::min(std::max(static_cast<int>(fi), 0), nx - 2);
        const int j0 = std::min(std::max(static_cast<int>(fj), 0), nx - 2);
        const int k0 = std::min(std::max(static_cast<int>(fk), 0), nz - 2);
        const double a = fi - i0, b = fj - j0, c = fk - k0;
        double out = 0.0;
        for (int di = 0; di < 2; ++di)
            for (int dj = 0; dj < 2; ++dj)
                for (int dk = 0; dk < 2; ++dk)
                    out += (di ? a : 1 - a) * (dj ? b : 1 - b) * (dk ? c : 1 - c) *
                           u[idx(i0 + di, j0 + dj, k0 + dk)];
        return out;
    };

    // z-table of the incident wave per step (it depends on z and t only)
    std::vector<double> uinc_nodes(g.z_samples);
    std::vector<double> d2t_line(nz);

    const auto record = [&](const std::vector<double>& u, int step) {
        const double t = step * dt;
        for (int k = 0; k < g.z_samples; ++k) uinc_nodes[k] = inc.value(g.z(k), t);
        for (int i = 0; i < g.n + 2; ++i)
            for (int j = 0; j < g.n + 2; ++j)
                for (int k = 0; k < g.z_samples; ++k)
                    wf.u.at(i, j, k, step) =
                        uinc_nodes[k] + sample_sc(u, g.x(i), g.y(j), g.z(k));
        // normal derivative of the total field at z=0: the incident part has
        // zero z-slope there by symmetry of the mollifier, the scattered part
        // is differenced one-sidedly on the solver grid
        for (int i = 1; i <= g.n; ++i)
            for (int j = 1; j <= g.n; ++j) {
                const double x = g.x(i), y = g.y(j);
                const double s0 = sample_sc(u, x, y, 0.0);
                const double s1 = sample_sc(u, x, y, hs);
                const double s2 = sample_sc(u, x, y, 2.0 * hs);
                wf.uz_gamma.at(i, j, step) = (-1.5 * s0 + 2.0 * s1 - 0.5 * s2) / hs;
            }
    };

    record(u_curr, 0);

    double e_ref = -1.0;
    for (int step = 1; step <= steps; ++step) {
        const double t_mid = (step - 1) * dt;
        if (any_source)
            for (int k = 0; k < nz; ++k) d2t_line[k] = inc.d2t(zf(k), t_mid);
        const double dt2 = dt * dt;
        for (int i = 1; i < nx - 1; ++i)
            for (int j = 1; j < nx - 1; ++j)
                for (int k = 1; k < nz - 1; ++k) {
                    const size_t q = idx(i, j, k);
                    const double lap =
                        (u_curr[idx(i + 1, j, k)] + u_curr[idx(i - 1, j, k)] +
                         u_curr[idx(i, j + 1, k)] + u_curr[idx(i, j - 1, k)] +
                         u_curr[idx(i, j, k + 1)] + u_curr[idx(i, j, k - 1)] -
                         6.0 * u_curr[q]) / (hs * hs);
                    const double f = src_fac[q] != 0.0 ? src_fac[q] * d2t_line[k] : 0.0;
                    u_next[q] = 2.0 * u_curr[q] - u_prev[q] + dt2 * inv_n2[q] * (lap + f);
                }
        std::swap(u_prev, u_curr);
        std::swap(u_curr, u_next);
        record(u_curr, step);

        // scattered-field energy once the front has cleared the inhomogeneity
        if (step * dt > 1.0 * m.n0 + 4.0 * opts.eps) {
            double e = 0.0;
            for (int i = 1; i < nx - 1; ++i)
                for (int j = 1; j < nx - 1; ++j)
                    for (int k = 1; k < nz - 1; ++k) {
                        const size_t q = idx(i, j, k);
                        const double ut = (u_curr[q] - u_prev[q]) / dt;
                        const double ux = (u_curr[idx(i + 1, j, k)] - u_curr[idx(i - 1, j, k)]) /
                                          (2.0 * hs);
                        const double uy = (u_curr[idx(i, j + 1, k)] - u_curr[idx(i, j - 1, k)]) /
                                          (2.0 * hs);
                        const double uz = (u_curr[idx(i, j, k + 1)] - u_curr[idx(i, j, k - 1)]) /
                                          (2.0 * hs);
                        e += 0.5 * (ut * ut / inv_n2[q] + ux * ux + uy * uy + uz * uz);
                    }
            e *= hs * hs * hs;
            if (e_ref < 0.0)
                e_ref = e;
            else if (e_ref > 0.0)
                wf.energy_drift = std::max(wf.energy_drift, std::abs(e - e_ref) / e_ref);
        }
    }
    return wf;
}

GammaTrace mollify_trace(const GammaTrace& tr, double eps) {
    const double sigma = std::sqrt(2.0) * eps / 3.0;  // two source kernels convolved
    const double dt = tr.dt;
    const int reach = static_cast<int>(std::ceil(4.0 * sigma / dt));
    std::vector<double> kern(2 * reach + 1);
    double ksum = 0.0;
    for (int q = -reach; q <= reach; ++q) {
        const double a = q * dt / sigma;
        ksum += kern[q + reach] = std::exp(-0.5 * a * a);
    }
    for (auto& k : kern) k /= ksum;
    GammaTrace out(tr.grid, tr.nt, tr.dt);
    for (int i = 1; i <= tr.n; ++i)
        for (int j = 1; j <= tr.n; ++j)
            for (int l = 0; l < tr.nt; ++l) {
                double s = 0.0;
                for (int q = -reach; q <= reach; ++q) {
                    const int lq = l + q;
                    // causal extension on the left, continuation on the right
                    const double val = lq < 0 ? 0.0 : tr.at(i, j, std::min(lq, tr.nt - 1));
                    s += kern[q + reach] * val;
                }
                out.at(i, j, l) = s;
            }
    return out;
}

std::vector<FrontProbe> detect_fronts(const WaveField& field, double z_min, double z_max) {
    std::vector<FrontProbe> probes;
    const GridSpec& g = field.grid;
    const double dtw = field.wave_dt();
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j)
            for (int k = 0; k < g.z_samples; ++k) {
                const double z = g.z(k);
                if (z < z_min || z > z_max) continue;
                double umax = 0.0;
                for (int l = 0; l < field.nt; ++l)
                    umax = std::max(umax, field.u.at(i, j, k, l));
                if (umax < 1e-6) continue;
                const double thr = 0.5 * umax;
                double arrival = -1.0;
                for (int l = 1; l < field.nt; ++l) {
                    const double a = field.u.at(i, j, k, l - 1), b = field.u.at(i, j, k, l);
                    if (a < thr && b >= thr) {
                        arrival = (l - 1 + (thr - a) / (b - a)) * dtw;
                        break;
                    }
                }
                if (arrival < 0.0) continue;
                // plateau just behind the fully developed front: the mollified
                // rise is complete past ~4 effective widths, while the linear
                // term of the expansion has barely grown yet
                const int lp = std::min(
                    field.nt - 1,
                    static_cast<int>((arrival + 2.0 * field.eps) / dtw) + 2);
                probes.push_back({i, j, k, arrival, field.u.at(i, j, k, lp)});
            }
    return probes;
}

}  // namespace pwcip
