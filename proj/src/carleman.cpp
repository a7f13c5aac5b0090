#include "pwcip/carleman.hpp"

#include <algorithm>
#include <cmath>

namespace pwcip {

void check_xi_bounds(const SemiDiscreteField& xi, const CarlemanParams& p) {
    if (!xi.is_static()) throw DomainMismatch("coefficient field must be static");
    for (double v : xi.v)
        if (v < p.xi0 - 1e-12 || v > p.xi1 + 1e-12)
            throw ConfigError("coefficient field leaves [xi0, xi1]");
    const SemiDiscreteField xz = op_dz(xi);
    for (double v : xz.v)
        if (std::abs(v) > p.xi2 + 1e-9)
            throw ConfigError("coefficient z-slope exceeds xi2");
}

namespace {

// linear exponential moments over one cell:
// J0 = int_0^1 (1-u) e^(-theta u) du,  J1 = int_0^1 u e^(-theta u) du
void exp_moments1(double theta, double& j0, double& j1) {
    if (std::abs(theta) < 1e-3) {
        const double t2 = theta * theta, t3 = t2 * theta, t4 = t3 * theta;
        j0 = 0.5 - theta / 6.0 + t2 / 24.0 - t3 / 120.0 + t4 / 720.0;
        j1 = 0.5 - theta / 3.0 + t2 / 8.0 - t3 / 30.0 + t4 / 144.0;
        return;
    }
    const double e = std::exp(-theta);
    j0 = (theta - 1.0 + e) / (theta * theta);
    j1 = (1.0 - (1.0 + theta) * e) / (theta * theta);
}

// quadratic (Simpson-type) exponential moments over a double cell u in [0,2]:
// weights of f(0), f(1), f(2) for int_0^2 (quadratic interpolant) e^(-theta u) du
void exp_moments2(double theta, double& w0, double& w1, double& w2) {
    double i0, i1, i2;  // plain power moments int_0^2 u^m e^(-theta u) du
    if (std::abs(theta) < 1e-2) {
        const double t2 = theta * theta, t3 = t2 * theta, t4 = t3 * theta, t5 = t4 * theta;
        i0 = 2.0 - 2.0 * theta + 4.0 * t2 / 3.0 - 2.0 * t3 / 3.0 + 4.0 * t4 / 15.0 -
             4.0 * t5 / 45.0;
        i1 = 2.0 - 8.0 * theta / 3.0 + 2.0 * t2 - 16.0 * t3 / 15.0 + 4.0 * t4 / 9.0 -
             16.0 * t5 / 105.0;
        i2 = 8.0 / 3.0 - 4.0 * theta + 16.0 * t2 / 5.0 - 16.0 * t3 / 9.0 + 16.0 * t4 / 21.0 -
             4.0 * t5 / 15.0;
    } else {
        const double e = std::exp(-2.0 * theta);
        i0 = (1.0 - e) / theta;
        i1 = (1.0 - (1.0 + 2.0 * theta) * e) / (theta * theta);
        i2 = (2.0 - (2.0 + 4.0 * theta + 4.0 * theta * theta) * e) / (theta * theta * theta);
    }
    // Lagrange basis on nodes 0, 1, 2
    w0 = 0.5 * (i2 - 3.0 * i1 + 2.0 * i0);
    w1 = 2.0 * i1 - i2;
    w2 = 0.5 * (i2 - i1);
}

// per-sample weights of the weighted composite sum:
//   int_0^L f(s) e^(-c s) ds  ~=~  sum_k f(s_k) w(k)
// exact for piecewise-quadratic f on double cells (odd sample counts),
// uniformly in c; a trailing single cell falls back to the linear rule
std::vector<double> weighted_quad(int m, double step, double c) {
    std::vector<double> w(m, 0.0);
    const double theta = c * step;
    double q0, q1, q2;
    exp_moments2(theta, q0, q1, q2);
    int k = 0;
    for (; k + 2 < m; k += 2) {
        const double damp = std::exp(-c * (step * k)) * step;
        w[k] += damp * q0;
        w[k + 1] += damp * q1;
        w[k + 2] += damp * q2;
    }
    if (k + 1 < m) {
        double j0, j1;
        exp_moments1(theta, j0, j1);
        const double damp = std::exp(-c * (step * k)) * step;
        w[k] += damp * j0;
        w[k + 1] += damp * j1;
    }
    return w;
}

struct QuadCtx {
    const GridSpec* g;
    double h2;
    std::vector<double> wz;   // weighted z quadrature at 2 lambda
    std::vector<double> wt;   // weighted t quadrature at 2 lambda alpha
    std::vector<double> wz0;  // plain z trapezoid (for unweighted pieces)

    QuadCtx(const GridSpec& grid, const CarlemanParams& p) : g(&grid) {
        h2 = grid.h() * grid.h();
        wz = weighted_quad(grid.z_samples, grid.dz(), 2.0 * p.lambda);
        wt = weighted_quad(grid.t_samples, grid.dt(), 2.0 * p.lambda * p.alpha);
        wz0.resize(grid.z_samples);
        for (int k = 0; k < grid.z_samples; ++k)
            wz0[k] = trapz_w(k, grid.z_samples) * grid.dz();
    }
};

// weighted bulk sum of a node-wise integrand over interior (i,j) x z x t
template <typename F>
double bulk(const QuadCtx& q, int nz, int nt, F f) {
    double total = 0.0;
    for (int i = 1; i <= q.g->n; ++i)
        for (int j = 1; j <= q.g->n; ++j)
            for (int k = 0; k < nz; ++k) {
                double row = 0.0;
                for (int l = 0; l < nt; ++l) row += q.wt[l] * f(i, j, k, l);
                total += q.h2 * q.wz[k] * row;
            }
    return total;
}

SemiDiscreteField slice_at(const SemiDiscreteField& f, int l) {
    SemiDiscreteField s(f.grid, 1);
    for (int i = 0; i < f.ni; ++i)
        for (int j = 0; j < f.nj; ++j)
            for (int k = 0; k < f.nz; ++k) s.at(i, j, k) = f.at(i, j, k, l);
    return s;
}

}  // namespace

double lhs_c4(const SemiDiscreteField& v, const SemiDiscreteField& xi, const CarlemanParams& p) {
    if (v.is_static()) throw DomainMismatch("estimate operand must be time-dependent");
    if (!xi.is_static() || !xi.grid.same_layout(v.grid))
        throw DomainMismatch("coefficient field must be static on the same grid");
    const QuadCtx q(v.grid, p);
    const SemiDiscreteField lap = laplacian_h(v);
    const SemiDiscreteField vzt = op_dzt(v);
    return bulk(q, v.nz, v.nt, [&](int i, int j, int k, int l) {
        const double r = lap.at(i, j, k, l) - xi.at(i, j, k) * vzt.at(i, j, k, l);
        return r * r;
    });
}

C4Groups rhs_groups_c4(const SemiDiscreteField& v, const CarlemanParams& p) {
    if (v.is_static()) throw DomainMismatch("estimate operand must be time-dependent");
    const QuadCtx q(v.grid, p);
    const double lam = p.lambda, lam2 = lam * lam;
    C4Groups gr;

    const SemiDiscreteField vz = op_dz(v);
    const SemiDiscreteField vt = op_dt(v);
    gr.pos_interior = lam * bulk(q, v.nz, v.nt, [&](int i, int j, int k, int l) {
        const double a = vz.at(i, j, k, l), b = vt.at(i, j, k, l), c = v.at(i, j, k, l);
        return a * a + b * b + lam2 * c * c;
    });

    // t = 0 slice with the z-only weight
    double t0 = 0.0;
    for (int i = 1; i <= v.grid.n; ++i)
        for (int j = 1; j <= v.grid.n; ++j)
            for (int k = 0; k < v.nz; ++k) {
                const double a = vz.at(i, j, k, 0), c = v.at(i, j, k, 0);
                t0 += q.h2 * q.wz[k] * (a * a + lam2 * c * c);
            }
    gr.pos_t0 = lam * t0;

    // terminal slice, damped by the weight at t = T1
    const SemiDiscreteField v_end = slice_at(v, v.nt - 1);
    const SemiDiscreteField vz_end = slice_at(vz, v.nt - 1);
    gr.neg_terminal = lam * std::exp(-2.0 * lam * p.alpha * v.grid.T1) *
                      (norm_sq(vz_end, Norm::L2h_Omega) + lam2 * norm_sq(v_end, Norm::L2h_Omega));

    gr.neg_theta = norm_sq_L2h_Theta(extract_theta(v));

    const GammaTrace v_g = extract_gamma(v);
    const GammaTrace vz_g = extract_gamma(vz);
    gr.neg_gamma = lam * (norm_sq_H1h_Gamma(vz_g) + lam2 * norm_sq_L2h_Gamma(v_g));
    return gr;
}

double lhs_c6(const SemiDiscreteField& v, const CarlemanParams& p) {
    if (v.is_static()) throw DomainMismatch("estimate operand must be time-dependent");
    const QuadCtx q(v.grid, p);
    const SemiDiscreteField lap = laplacian_h(v);
    return bulk(q, v.nz, v.nt, [&](int i, int j, int k, int l) {
        const double r = lap.at(i, j, k, l);
        return r * r;
    });
}

C6Groups rhs_groups_c6(const SemiDiscreteField& v, const CarlemanParams& p) {
    if (v.is_static()) throw DomainMismatch("estimate operand must be time-dependent");
    const QuadCtx q(v.grid, p);
    const double lam = p.lambda, lam2 = lam * lam;
    C6Groups gr;
    const SemiDiscreteField vz = op_dz(v);
    gr.pos_interior = lam * bulk(q, v.nz, v.nt, [&](int i, int j, int k, int l) {
        const double a = vz.at(i, j, k, l), c = v.at(i, j, k, l);
        return a * a + lam2 * c * c;
    });
    gr.neg_theta = norm_sq_L2h_Theta(extract_theta(v));
    const GammaTrace v_g = extract_gamma(v);
    const GammaTrace vz_g = extract_gamma(vz);
    gr.neg_gamma = lam * (norm_sq_L2h_Gamma(vz_g) + lam2 * norm_sq_L2h_Gamma(v_g));
    return gr;
}

// --- verification ---------------------------------------------------------------

std::vector<TestField> default_field_suite(double X, double T1) {
    const double pi = M_PI;
    std::vector<TestField> suite;
    const auto tw = [T1](double t) { const double r = 1.0 - t / T1; return r * r; };

    suite.push_back({"clean-poly", FieldFamily::Clean,
                     [=](double x, double y, double z, double t) {
                         return z * z * tw(t) * (1.0 - (x / X) * (x / X)) *
                                (1.0 - (y / X) * (y / X));
                     }});
    suite.push_back({"clean-trig", FieldFamily::Clean,
                     [=](double x, double y, double z, double t) {
                         return z * z * (1.0 + z) * tw(t) * (1.0 + t) *
                                std::cos(pi * x / (2.0 * X)) * std::cos(pi * y / (2.0 * X));
                     }});
    suite.push_back({"clean-mixed", FieldFamily::Clean,
                     [=](double x, double y, double z, double t) {
                         return z * z * (2.0 - z) * tw(t) * (1.0 + 0.5 * t) *
                                std::cos(pi * x / (2.0 * X)) * (1.0 - (y / X) * (y / X));
                     }});
    suite.push_back({"gamma-poly", FieldFamily::GammaSupported,
                     [=](double x, double y, double z, double t) {
                         return (1.0 - 0.5 * z) * tw(t) * std::cos(pi * x / (2.0 * X)) *
                                std::cos(pi * y / (2.0 * X));
                     }});
    suite.push_back({"gamma-tz", FieldFamily::GammaSupported,
                     [=](double x, double y, double z, double t) {
                         return t * z * (1.0 - z) *
                                std::exp(-(x * x + y * y) / (X * X));
                     }});
    suite.push_back({"theta-poly", FieldFamily::ThetaSupported,
                     [=](double x, double y, double z, double t) {
                         return z * z * tw(t) * 0.5 *
                                ((x / X) * (x / X) + (y / X) * (y / X));
                     }});
    suite.push_back({"theta-trig", FieldFamily::ThetaSupported,
                     [=](double x, double y, double z, double t) {
                         return z * z * tw(t) * (1.5 + 0.5 * std::cos(pi * x / X)) *
                                (1.5 + 0.5 * std::cos(pi * y / X));
                     }});
    return suite;
}

VerifyReport verify_estimate(Estimate which, const std::vector<TestField>& suite,
                             const std::vector<double>& lambda_grid, CarlemanParams base,
                             const GridSpec& grid) {
    VerifyReport rep;
    rep.which = which;
    rep.lambda_grid = lambda_grid;
    base.validate();

    const SemiDiscreteField xi =
        make_static_field(grid, [&](double, double, double) { return base.xi1; });

    std::vector<SemiDiscreteField> fields;
    fields.reserve(suite.size());
    for (const auto& tf : suite) fields.push_back(make_field(grid, grid.t_samples, tf.fn));

    std::vector<std::vector<double>> clean_ratios(suite.size());

    for (double lam : lambda_grid) {
        CarlemanParams p = base;
        p.lambda = lam;
        double inf_rho = -1.0;
        for (size_t fi = 0; fi < suite.size(); ++fi) {
            EstimateSample smp;
            smp.field = suite[fi].name;
            smp.family = suite[fi].family;
            smp.lambda = lam;
            if (which == Estimate::C4) {
                smp.lhs = lhs_c4(fields[fi], xi, p);
                const C4Groups gr = rhs_groups_c4(fields[fi], p);
                smp.pos = gr.pos_interior;
                smp.pos_t0 = gr.pos_t0;
                smp.neg = gr.neg_terminal + gr.neg_theta + gr.neg_gamma;
                smp.dominance = gr.dominance();
            } else {
                smp.lhs = lhs_c6(fields[fi], p);
                const C6Groups gr = rhs_groups_c6(fields[fi], p);
                smp.pos = gr.pos_interior;
                smp.neg = gr.neg_theta + gr.neg_gamma;
                smp.dominance = gr.dominance();
            }
            if (smp.dominance > 0.0) {
                smp.rho = smp.lhs / smp.dominance;
                if (inf_rho < 0.0 || smp.rho < inf_rho) inf_rho = smp.rho;
            }
            if (suite[fi].family == FieldFamily::Clean)
                clean_ratios[fi].push_back(smp.lhs / ((smp.pos + smp.pos_t0) / lam));
            rep.samples.push_back(smp);
        }
        rep.inf_rho_per_lambda.push_back(inf_rho);
    }

    // least-squares slope of log(ratio) against log(lambda) per clean field
    rep.min_clean_slope = 1e300;
    for (size_t fi = 0; fi < suite.size(); ++fi) {
        if (suite[fi].family != FieldFamily::Clean) continue;
        const auto& r = clean_ratios[fi];
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const int n = static_cast<int>(r.size());
        for (int q = 0; q < n; ++q) {
            const double lx = std::log(lambda_grid[q]), ly = std::log(r[q]);
            sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        }
        SlopeFit fit;
        fit.field = suite[fi].name;
        fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        fit.intercept = (sy - fit.slope * sx) / n;
        rep.clean_slopes.push_back(fit);
        rep.min_clean_slope = std::min(rep.min_clean_slope, fit.slope);
    }
    if (rep.clean_slopes.empty()) rep.min_clean_slope = 0.0;

    // smallest grid lambda such that every clean field dominates from there on
    const size_t nl = lambda_grid.size();
    std::vector<bool> clean_dominant(nl, true);
    for (const auto& smp : rep.samples) {
        if (smp.family != FieldFamily::Clean) continue;
        const size_t qi = std::find(lambda_grid.begin(), lambda_grid.end(), smp.lambda) -
                          lambda_grid.begin();
        if (smp.dominance <= 0.0) clean_dominant[qi] = false;
    }
    int q0 = -1;
    for (int q = static_cast<int>(nl) - 1; q >= 0; --q) {
        if (!clean_dominant[q]) break;
        q0 = q;
    }
    if (q0 >= 0) {
        rep.lambda0_found = true;
        rep.lambda0_emp = lambda_grid[q0];
        double best = 1e300;
        for (const auto& smp : rep.samples)
            if (smp.lambda >= rep.lambda0_emp && smp.dominance > 0.0)
                best = std::min(best, smp.rho);
        rep.best_C = best == 1e300 ? 0.0 : best;
    }
    return rep;
}

}  // namespace pwcip
