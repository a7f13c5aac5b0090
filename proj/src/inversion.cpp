#include "pwcip/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace pwcip {

namespace {

// pointwise helpers; static fields broadcast over the time index
SemiDiscreteField mul_static(const SemiDiscreteField& f, const SemiDiscreteField& s,
                             double factor = 1.0) {
    SemiDiscreteField out(f.grid, f.nt);
    for (int i = 0; i < f.ni; ++i)
        for (int j = 0; j < f.nj; ++j)
            for (int k = 0; k < f.nz; ++k) {
                const double c = factor * s.at(i, j, k);
                for (int l = 0; l < f.nt; ++l) out.at(i, j, k, l) = c * f.at(i, j, k, l);
            }
    return out;
}

void axpy(SemiDiscreteField& y, const SemiDiscreteField& x, double a = 1.0) {
    for (size_t q = 0; q < y.v.size(); ++q) y.v[q] += a * x.v[q];
}

// forward evaluation shared by residuals() and objective()
struct SystemFields {
    SemiDiscreteField w0, ell;           // t=0 slice and its log
    SemiDiscreteField bx, by, bz;        // gradient of ell
    SemiDiscreteField gx, gy, gz;        // gradient of tau; gz is the slope
    SemiDiscreteField bg;                // b . g
    SemiDiscreteField wt, wzt, wtx, wty, lap_w;
    SemiDiscreteField lap_tau;
    SemiDiscreteField R1;                // interior transverse support
    SemiDiscreteField R2;
};

SystemFields eval_system(const SemiDiscreteField& w, const SemiDiscreteField& tau,
                         const GridSpec& g, double A0) {
    SystemFields sf;
    sf.w0 = w.slice_t0();
    for (int i = 0; i < sf.w0.ni; ++i)
        for (int j = 0; j < sf.w0.nj; ++j)
            for (int k = 0; k < sf.w0.nz; ++k)
                if (sf.w0.at(i, j, k) < A0 - 1e-12)
                    throw FloorViolation("w(.,0) dips below the amplitude floor at node (" +
                                         std::to_string(i) + "," + std::to_string(j) + "," +
                                         std::to_string(k) + "): " +
                                         std::to_string(sf.w0.at(i, j, k)) + " < " +
                                         std::to_string(A0));
    sf.ell = sf.w0;
    for (auto& v : sf.ell.v) v = std::log(v);
    sf.bx = op_dx(sf.ell);
    sf.by = op_dy(sf.ell);
    sf.bz = op_dz(sf.ell);
    sf.gx = op_dx(tau);
    sf.gy = op_dy(tau);
    sf.gz = op_dz(tau);
    sf.bg = SemiDiscreteField(g, 1);
    for (size_t q = 0; q < sf.bg.v.size(); ++q)
        sf.bg.v[q] = sf.bx.v[q] * sf.gx.v[q] + sf.by.v[q] * sf.gy.v[q] + sf.bz.v[q] * sf.gz.v[q];

    sf.wt = op_dt(w);
    sf.wzt = op_dz(sf.wt);
    sf.wtx = op_dx(sf.wt);
    sf.wty = op_dy(sf.wt);
    sf.lap_w = laplacian_h(w);
    sf.lap_tau = laplacian_h(tau);

    sf.R1 = SemiDiscreteField(g, w.nt);
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j)
            for (int k = 0; k < w.nz; ++k) {
                const double xi = sf.gz.at(i, j, k);
                const double gxv = sf.gx.at(i, j, k), gyv = sf.gy.at(i, j, k);
                const double bgv = sf.bg.at(i, j, k);
                for (int l = 0; l < w.nt; ++l)
                    sf.R1.at(i, j, k, l) = sf.lap_w.at(i, j, k, l) -
                                           2.0 * xi * sf.wzt.at(i, j, k, l) -
                                           2.0 * sf.wtx.at(i, j, k, l) * gxv -
                                           2.0 * sf.wty.at(i, j, k, l) * gyv +
                                           2.0 * sf.wt.at(i, j, k, l) * bgv;
            }
    sf.R2 = SemiDiscreteField(g, 1);
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j)
            for (int k = 0; k < w.nz; ++k)
                sf.R2.at(i, j, k) = sf.lap_tau.at(i, j, k) + 2.0 * sf.bg.at(i, j, k);
    return sf;
}

// one-sided first-derivative taps at the lower axis end
constexpr double kD1Low[3] = {-1.5, 2.0, -0.5};

}  // namespace

std::pair<SemiDiscreteField, SemiDiscreteField> residuals(const SemiDiscreteField& w,
                                                          const SemiDiscreteField& tau,
                                                          const GridSpec& g, double A0) {
    SystemFields sf = eval_system(w, tau, g, A0);
    return {std::move(sf.R1), std::move(sf.R2)};
}

ObjectiveEval objective(const SemiDiscreteField& w, const SemiDiscreteField& tau,
                        const InversionProblem& prob) {
    const GridSpec& g = prob.grid;
    const SolverOptions& o = prob.opts;
    const double lam = o.lambda, alpha = o.alpha, beta = o.beta_eff();
    const double h = g.h(), h2 = h * h;

    SystemFields sf = eval_system(w, tau, g, prob.set.A0);

    ObjectiveEval ev;
    ev.grad_w = SemiDiscreteField(g, w.nt);
    ev.grad_tau = SemiDiscreteField(g, 1);

    // residual terms with the exponential weight over plain trapezoid cells
    SemiDiscreteField S1(g, w.nt);  // dJ / dR1
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j)
            for (int k = 0; k < w.nz; ++k) {
                const double wz = trapz_w(k, w.nz) * g.dz();
                const double ez = std::exp(-2.0 * lam * g.z(k));
                for (int l = 0; l < w.nt; ++l) {
                    const double wq = h2 * wz * trapz_w(l, w.nt) * g.dt() * ez *
                                      std::exp(-2.0 * lam * alpha * g.t(l)) * o.w_r1;
                    const double r = sf.R1.at(i, j, k, l);
                    ev.r1_term += wq * r * r;
                    S1.at(i, j, k, l) = 2.0 * wq * r;
                }
            }
    SemiDiscreteField S2(g, 1);
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j)
            for (int k = 0; k < w.nz; ++k) {
                const double wq = h2 * trapz_w(k, w.nz) * g.dz() *
                                  std::exp(-2.0 * lam * g.z(k)) * o.w_r2;
                const double r = sf.R2.at(i, j, k);
                ev.r2_term += wq * r * r;
                S2.at(i, j, k) = 2.0 * wq * r;
            }

    // --- back-propagation through R1 ------------------------------------------
    // lap_h w
    axpy(ev.grad_w, adj_dxx(S1));
    axpy(ev.grad_w, adj_dyy(S1));
    axpy(ev.grad_w, adj_dzz(S1));
    // -2 xi w_zt  (xi = dz tau)
    axpy(ev.grad_w, adj_dt(adj_dz(mul_static(S1, sf.gz, -2.0))));
    {
        SemiDiscreteField gxi(g, 1);
        for (int i = 0; i < gxi.ni; ++i)
            for (int j = 0; j < gxi.nj; ++j)
                for (int k = 0; k < gxi.nz; ++k) {
                    double s = 0.0;
                    for (int l = 0; l < w.nt; ++l)
                        s += -2.0 * sf.wzt.at(i, j, k, l) * S1.at(i, j, k, l);
                    gxi.at(i, j, k) = s;
                }
        axpy(ev.grad_tau, adj_dz(gxi));
    }
    // -2 w_tx gx and -2 w_ty gy
    axpy(ev.grad_w, adj_dt(adj_dx(mul_static(S1, sf.gx, -2.0))));
    axpy(ev.grad_w, adj_dt(adj_dy(mul_static(S1, sf.gy, -2.0))));
    // gradient-of-tau contributions from the transverse cross terms
    SemiDiscreteField g_gx(g, 1), g_gy(g, 1), g_gz(g, 1);
    for (int i = 0; i < g_gx.ni; ++i)
        for (int j = 0; j < g_gx.nj; ++j)
            for (int k = 0; k < g_gx.nz; ++k) {
                double sx = 0.0, sy = 0.0;
                for (int l = 0; l < w.nt; ++l) {
                    sx += -2.0 * sf.wtx.at(i, j, k, l) * S1.at(i, j, k, l);
                    sy += -2.0 * sf.wty.at(i, j, k, l) * S1.at(i, j, k, l);
                }
                g_gx.at(i, j, k) = sx;
                g_gy.at(i, j, k) = sy;
            }
    // +2 w_t (b . g)
    axpy(ev.grad_w, adj_dt(mul_static(S1, sf.bg, 2.0)));
    SemiDiscreteField g_bg(g, 1);
    for (int i = 0; i < g_bg.ni; ++i)
        for (int j = 0; j < g_bg.nj; ++j)
            for (int k = 0; k < g_bg.nz; ++k) {
                double s = 0.0;
                for (int l = 0; l < w.nt; ++l)
                    s += 2.0 * sf.wt.at(i, j, k, l) * S1.at(i, j, k, l);
                g_bg.at(i, j, k) = s;
            }

    // --- back-propagation through R2 ------------------------------------------
    axpy(ev.grad_tau, adj_dxx(S2));
    axpy(ev.grad_tau, adj_dyy(S2));
    axpy(ev.grad_tau, adj_dzz(S2));
    for (size_t q = 0; q < g_bg.v.size(); ++q) g_bg.v[q] += 2.0 * S2.v[q];

    // b . g fans out into both gradients
    SemiDiscreteField g_bx(g, 1), g_by(g, 1), g_bz(g, 1);
    for (size_t q = 0; q < g_bg.v.size(); ++q) {
        g_gx.v[q] += g_bg.v[q] * sf.bx.v[q];
        g_gy.v[q] += g_bg.v[q] * sf.by.v[q];
        g_gz.v[q] += g_bg.v[q] * sf.bz.v[q];
        g_bx.v[q] = g_bg.v[q] * sf.gx.v[q];
        g_by.v[q] = g_bg.v[q] * sf.gy.v[q];
        g_bz.v[q] = g_bg.v[q] * sf.gz.v[q];
    }
    axpy(ev.grad_tau, adj_dx(g_gx));
    axpy(ev.grad_tau, adj_dy(g_gy));
    axpy(ev.grad_tau, adj_dz(g_gz));

    // chain through ell = ln w0 into the t=0 slice of w
    SemiDiscreteField g_ell(g, 1);
    axpy(g_ell, adj_dx(g_bx));
    axpy(g_ell, adj_dy(g_by));
    axpy(g_ell, adj_dz(g_bz));
    for (int i = 0; i < g_ell.ni; ++i)
        for (int j = 0; j < g_ell.nj; ++j)
            for (int k = 0; k < g_ell.nz; ++k)
                ev.grad_w.at(i, j, k, 0) += g_ell.at(i, j, k) / sf.w0.at(i, j, k);

    // --- boundary penalties -----------------------------------------------------
    const TransformedData& d = prob.data;
    const double dt = g.dt(), dz = g.dz();

    // z=0 trace of w against g0 in the H1 trace form
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j) {
            for (int l = 0; l < w.nt; ++l) {
                const double wtq = trapz_w(l, w.nt) * dt;
                const double e0 = w.at(i, j, 0, l) - d.g0.at(i, j, l);
                ev.boundary_term += beta * h2 * wtq * e0 * e0;
                ev.grad_w.at(i, j, 0, l) += 2.0 * beta * h2 * wtq * e0;
                // time derivative of the mismatch with the shared stencils
                double e0t;
                int taps_idx[3];
                double taps_c[3];
                int ntap;
                if (l == 0) {
                    ntap = 3;
                    taps_idx[0] = 0; taps_idx[1] = 1; taps_idx[2] = 2;
                    taps_c[0] = kD1Low[0] / dt; taps_c[1] = kD1Low[1] / dt; taps_c[2] = kD1Low[2] / dt;
                } else if (l == w.nt - 1) {
                    ntap = 3;
                    taps_idx[0] = l; taps_idx[1] = l - 1; taps_idx[2] = l - 2;
                    taps_c[0] = -kD1Low[0] / dt; taps_c[1] = -kD1Low[1] / dt; taps_c[2] = -kD1Low[2] / dt;
                } else {
                    ntap = 2;
                    taps_idx[0] = l - 1; taps_idx[1] = l + 1;
                    taps_c[0] = -0.5 / dt; taps_c[1] = 0.5 / dt;
                }
                e0t = 0.0;
                for (int q = 0; q < ntap; ++q)
                    e0t += taps_c[q] * (w.at(i, j, 0, taps_idx[q]) - d.g0.at(i, j, taps_idx[q]));
                ev.boundary_term += beta * h2 * wtq * e0t * e0t;
                for (int q = 0; q < ntap; ++q)
                    ev.grad_w.at(i, j, 0, taps_idx[q]) += 2.0 * beta * h2 * wtq * e0t * taps_c[q];
            }
            // one-sided z-slope of w at the plane against g1
            for (int l = 0; l < w.nt; ++l) {
                const double wtq = trapz_w(l, w.nt) * dt;
                const double wz0 = (kD1Low[0] * w.at(i, j, 0, l) + kD1Low[1] * w.at(i, j, 1, l) +
                                    kD1Low[2] * w.at(i, j, 2, l)) / dz;
                const double e1 = wz0 - d.g1.at(i, j, l);
                ev.boundary_term += beta * h * wtq * e1 * e1;
                for (int q = 0; q < 3; ++q)
                    ev.grad_w.at(i, j, q, l) += 2.0 * beta * h * wtq * e1 * kD1Low[q] / dz;
            }
        }

    // lateral trace of w against g2 (faces summed separately, corners twice)
    const int nb = g.n + 1;
    for (int face = 0; face < 4; ++face)
        for (int m = 0; m < g.n + 2; ++m) {
            int ii, jj;
            switch (face) {
                case 0: ii = 0; jj = m; break;
                case 1: ii = nb; jj = m; break;
                case 2: ii = m; jj = 0; break;
                default: ii = m; jj = nb; break;
            }
            for (int k = 0; k < w.nz; ++k) {
                const double wzq = trapz_w(k, w.nz) * dz;
                for (int l = 0; l < w.nt; ++l) {
                    const double wtq = trapz_w(l, w.nt) * dt;
                    const double e2 = w.at(ii, jj, k, l) - d.g2.at(face, m, k, l);
                    ev.boundary_term += beta * h * wzq * wtq * e2 * e2;
                    ev.grad_w.at(ii, jj, k, l) += 2.0 * beta * h * wzq * wtq * e2;
                }
                // lateral trace of tau
                const double e3 = tau.at(ii, jj, k) - d.tau_theta.at(face, m, k);
                ev.boundary_term += beta * h * wzq * e3 * e3;
                ev.grad_tau.at(ii, jj, k) += 2.0 * beta * h * wzq * e3;
            }
        }

    // smoothness damping on the slope field (norm-cap surrogate)
    if (o.sigma_smooth > 0.0) {
        const double eta = o.sigma_smooth;
        const SemiDiscreteField xx = op_dx(sf.gz), xy = op_dy(sf.gz), xz = op_dz(sf.gz);
        SemiDiscreteField wxx(g, 1), wxy(g, 1), wxz(g, 1);
        for (int i = 1; i <= g.n; ++i)
            for (int j = 1; j <= g.n; ++j)
                for (int k = 0; k < g.z_samples; ++k) {
                    const double wq = h2 * trapz_w(k, g.z_samples) * dz;
                    const double a = xx.at(i, j, k), b = xy.at(i, j, k), c = xz.at(i, j, k);
                    ev.boundary_term += eta * wq * (a * a + b * b + c * c);
                    wxx.at(i, j, k) = 2.0 * eta * wq * a;
                    wxy.at(i, j, k) = 2.0 * eta * wq * b;
                    wxz.at(i, j, k) = 2.0 * eta * wq * c;
                }
        SemiDiscreteField back(g, 1);
        axpy(back, adj_dx(wxx));
        axpy(back, adj_dy(wxy));
        axpy(back, adj_dz(wxz));
        axpy(ev.grad_tau, adj_dz(back));
    }

    // plane conditions on tau: value pinned to zero, unit slope
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j) {
            const double e4 = tau.at(i, j, 0);
            ev.boundary_term += beta * h2 * e4 * e4;
            ev.grad_tau.at(i, j, 0) += 2.0 * beta * h2 * e4;
            const double tz0 = (kD1Low[0] * tau.at(i, j, 0) + kD1Low[1] * tau.at(i, j, 1) +
                                kD1Low[2] * tau.at(i, j, 2)) / dz;
            const double e5 = tz0 - 1.0;
            ev.boundary_term += beta * h2 * e5 * e5;
            for (int q = 0; q < 3; ++q)
                ev.grad_tau.at(i, j, q) += 2.0 * beta * h2 * e5 * kD1Low[q] / dz;
        }

    ev.J = ev.r1_term + ev.r2_term + ev.boundary_term;
    return ev;
}

SemiDiscreteField tau_from_sigma(const SemiDiscreteField& sigma) {
    SemiDiscreteField tau(sigma.grid, 1);
    const double dz = sigma.grid.dz();
    for (int i = 0; i < sigma.ni; ++i)
        for (int j = 0; j < sigma.nj; ++j) {
            tau.at(i, j, 0) = 0.0;
            for (int k = 1; k < sigma.nz; ++k)
                tau.at(i, j, k) = tau.at(i, j, k - 1) +
                                  0.5 * dz * (sigma.at(i, j, k - 1) + sigma.at(i, j, k));
        }
    return tau;
}

SemiDiscreteField recover_n(const SemiDiscreteField& tau, const GridSpec& g, int* flagged) {
    const SemiDiscreteField tx = op_dx(tau), ty = op_dy(tau), tz = op_dz(tau);
    SemiDiscreteField n(g, 1);
    int zero_nodes = 0;
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j)
            for (int k = 0; k < g.z_samples; ++k) {
                const double a = tx.at(i, j, k), b = ty.at(i, j, k), c = tz.at(i, j, k);
                const double v = std::sqrt(a * a + b * b + c * c);
                n.at(i, j, k) = v;
                if (v == 0.0) ++zero_nodes;
            }
    if (flagged) *flagged = zero_nodes;
    return n;
}

namespace {

struct VarPack {
    // flattening: w values first, then slope samples
    size_t nw, ns;
    GridSpec grid;
    int nt;

    std::vector<double> flatten(const SemiDiscreteField& w, const SemiDiscreteField& sigma) const {
        std::vector<double> x(nw + ns);
        std::copy(w.v.begin(), w.v.end(), x.begin());
        std::copy(sigma.v.begin(), sigma.v.end(), x.begin() + nw);
        return x;
    }
    void unflatten(const std::vector<double>& x, SemiDiscreteField& w,
                   SemiDiscreteField& sigma) const {
        std::copy(x.begin(), x.begin() + nw, w.v.begin());
        std::copy(x.begin() + nw, x.end(), sigma.v.begin());
    }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t q = 0; q < a.size(); ++q) s += a[q] * b[q];
    return s;
}

}  // namespace

InversionResult minimize(const InversionProblem& prob) {
    const GridSpec& g = prob.grid;
    g.validate();
    const int nt = prob.data.w.nt;

    SemiDiscreteField w(g, nt), sigma(g, 1);
    // initialization: the flat pair is the constant-medium truth
    if (prob.opts.init == SolverOptions::Init::Flat) {
        double mean_g0 = 0.0;
        for (double v : prob.data.g0.v) mean_g0 += v;
        mean_g0 /= static_cast<double>(prob.data.g0.v.size());
        const double w_init = std::min(std::max(mean_g0, prob.set.A0), prob.set.M);
        for (auto& v : w.v) v = w_init;
    } else {
        // extend the measured z=0 trace uniformly in depth
        for (int i = 0; i < w.ni; ++i)
            for (int j = 0; j < w.nj; ++j) {
                const int ic = std::min(std::max(i, 1), g.n), jc = std::min(std::max(j, 1), g.n);
                for (int k = 0; k < w.nz; ++k)
                    for (int l = 0; l < nt; ++l)
                        w.at(i, j, k, l) = std::min(
                            std::max(prob.data.g0.at(ic, jc, l), prob.set.A0), prob.set.M);
            }
    }
    for (auto& v : sigma.v) v = 1.0;

    VarPack pack{w.v.size(), sigma.v.size(), g, nt};
    std::vector<double> x = pack.flatten(w, sigma);
    const size_t n = x.size();

    std::vector<double> lb(n), ub(n);
    for (int i = 0; i < w.ni; ++i)
        for (int j = 0; j < w.nj; ++j)
            for (int k = 0; k < w.nz; ++k)
                for (int l = 0; l < nt; ++l) {
                    const size_t q = ((static_cast<size_t>(i) * w.nj + j) * w.nz + k) * nt + l;
                    lb[q] = (l == 0) ? prob.set.A0 : -prob.set.M;
                    ub[q] = prob.set.M;
                }
    for (size_t q = pack.nw; q < n; ++q) {
        lb[q] = 1.0;
        ub[q] = prob.set.n0;
    }
    const auto project = [&](std::vector<double>& y) {
        for (size_t q = 0; q < n; ++q) y[q] = std::min(std::max(y[q], lb[q]), ub[q]);
    };
    project(x);

    const auto eval = [&](const std::vector<double>& y, std::vector<double>& grad) {
        pack.unflatten(y, w, sigma);
        const SemiDiscreteField tau = tau_from_sigma(sigma);
        const ObjectiveEval ev = objective(w, tau, prob);
        grad.resize(n);
        std::copy(ev.grad_w.v.begin(), ev.grad_w.v.end(), grad.begin());
        // pull the tau gradient back to the slope samples: each tau(k) is a
        // trapezoid sum of slopes, so the adjoint is a weighted suffix sum
        const double dz = g.dz();
        for (int i = 0; i < sigma.ni; ++i)
            for (int j = 0; j < sigma.nj; ++j) {
                double suffix = 0.0;
                std::vector<double> gt(g.z_samples);
                for (int k = 0; k < g.z_samples; ++k) gt[k] = ev.grad_tau.at(i, j, k);
                for (int k = g.z_samples - 1; k >= 0; --k) {
                    const double s_next = suffix;  // sum over indices > k
                    const size_t q = pack.nw +
                                     (static_cast<size_t>(i) * sigma.nj + j) * g.z_samples + k;
                    grad[q] = (k == 0) ? 0.5 * dz * s_next
                                       : 0.5 * dz * gt[k] + dz * s_next;
                    suffix += gt[k];
                }
            }
        return ev;
    };

    InversionResult res;
    std::vector<double> grad;
    ObjectiveEval ev = eval(x, grad);
    double J = ev.J;

    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;
    std::vector<double> pg(n);

    const auto pg_norm = [&]() {
        double nrm = 0.0;
        for (size_t q = 0; q < n; ++q) {
            const double step = std::min(std::max(x[q] - grad[q], lb[q]), ub[q]) - x[q];
            pg[q] = step;
            nrm = std::max(nrm, std::abs(step));
        }
        return nrm;
    };

    int it = 0;
    res.trace.push_back({0, J, pg_norm(), 0.0, 0});
    res.status = SolveStatus::MaxIterations;
    for (it = 0; it < prob.opts.max_iter; ++it) {
        const double pgn = pg_norm();
        if (pgn < prob.opts.tol) {
            res.status = SolveStatus::Converged;
            break;
        }
        // two-loop recursion
        std::vector<double> d = grad;
        {
            const int mh = static_cast<int>(s_hist.size());
            std::vector<double> alpha_c(mh);
            for (int q = mh - 1; q >= 0; --q) {
                alpha_c[q] = rho_hist[q] * dot(s_hist[q], d);
                for (size_t r = 0; r < n; ++r) d[r] -= alpha_c[q] * y_hist[q][r];
            }
            if (mh > 0) {
                const double gamma = dot(s_hist[mh - 1], y_hist[mh - 1]) /
                                     dot(y_hist[mh - 1], y_hist[mh - 1]);
                for (auto& v : d) v *= gamma;
            }
            for (int q = 0; q < mh; ++q) {
                const double betaq = rho_hist[q] * dot(y_hist[q], d);
                for (size_t r = 0; r < n; ++r) d[r] += s_hist[q][r] * (alpha_c[q] - betaq);
            }
            for (auto& v : d) v = -v;
        }
        if (dot(grad, d) >= 0.0)
            for (size_t r = 0; r < n; ++r) d[r] = -grad[r];

        double step = 1.0;
        int backtracks = 0;
        std::vector<double> x_try(n), grad_try;
        double J_try = J;
        bool accepted = false;
        for (; backtracks <= prob.opts.max_backtracks; ++backtracks) {
            for (size_t r = 0; r < n; ++r) x_try[r] = x[r] + step * d[r];
            project(x_try);
            double gTdx = 0.0;
            for (size_t r = 0; r < n; ++r) gTdx += grad[r] * (x_try[r] - x[r]);
            if (gTdx >= 0.0) {
                step *= 0.5;
                continue;
            }
            const ObjectiveEval ev_try = eval(x_try, grad_try);
            J_try = ev_try.J;
            if (J_try <= J + 1e-4 * gTdx) {
                ev = ev_try;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            res.status = SolveStatus::LineSearchFailure;
            res.trace.push_back({it + 1, J, pgn, 0.0, backtracks});
            break;
        }
        // curvature pair from the accepted move
        std::vector<double> s_vec(n), y_vec(n);
        for (size_t r = 0; r < n; ++r) {
            s_vec[r] = x_try[r] - x[r];
            y_vec[r] = grad_try[r] - grad[r];
        }
        const double sy = dot(s_vec, y_vec);
        if (sy > 1e-12 * std::sqrt(dot(s_vec, s_vec)) * std::sqrt(dot(y_vec, y_vec))) {
            s_hist.push_back(std::move(s_vec));
            y_hist.push_back(std::move(y_vec));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > prob.opts.lbfgs_m) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        x.swap(x_try);
        grad.swap(grad_try);
        J = J_try;
        res.trace.push_back({it + 1, J, pg_norm(), step, backtracks});
    }

    pack.unflatten(x, w, sigma);
    res.w_hat = w;
    res.sigma_hat = sigma;
    res.tau_hat = tau_from_sigma(sigma);
    res.n_hat = recover_n(res.tau_hat, g);
    res.J_final = J;
    res.iterations = it;
    // unweighted residual norms for diagnostics
    auto [R1, R2] = residuals(w, res.tau_hat, g, prob.set.A0);
    double s = 0.0;
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j)
            for (int k = 0; k < R1.nz; ++k)
                for (int l = 0; l < R1.nt; ++l)
                    s += g.h() * g.h() * trapz_w(k, R1.nz) * g.dz() * trapz_w(l, R1.nt) *
                         g.dt() * R1.at(i, j, k, l) * R1.at(i, j, k, l);
    res.r1_norm = std::sqrt(s);
    res.r2_norm = std::sqrt(norm_sq(R2, Norm::L2h_Omega));
    res.active_bounds = 0;
    for (size_t q = 0; q < n; ++q)
        if (x[q] == lb[q] || x[q] == ub[q]) ++res.active_bounds;
    return res;
}

}  // namespace pwcip
