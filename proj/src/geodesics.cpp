#include "pwcip/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

namespace pwcip {

double amplitude_floor(double n0, double n00) {
    return 0.5 * std::exp(-1.5 * n00 * n00 * n0 * n0);
}

namespace {

// --- ray right-hand side: dx/ds = p / n^2, dp/ds = grad(ln n) ---------------

struct RayState {
    Vec3 x, p;
};

inline RayState ray_rhs(const MediumSpec& m, const RayState& s) {
    const double n = eval_n(m, s.x);
    const Vec3 g = eval_grad_n(m, s.x);
    return {s.p * (1.0 / (n * n)), g * (1.0 / n)};
}

inline RayState ray_axpy(const RayState& a, double c, const RayState& d) {
    return {a.x + d.x * c, a.p + d.p * c};
}

inline RayState rk4_ray(const MediumSpec& m, const RayState& s, double ds) {
    const RayState k1 = ray_rhs(m, s);
    const RayState k2 = ray_rhs(m, ray_axpy(s, 0.5 * ds, k1));
    const RayState k3 = ray_rhs(m, ray_axpy(s, 0.5 * ds, k2));
    const RayState k4 = ray_rhs(m, ray_axpy(s, ds, k3));
    RayState out = s;
    out.x += (k1.x + (k2.x + k3.x) * 2.0 + k4.x) * (ds / 6.0);
    out.p += (k1.p + (k2.p + k3.p) * 2.0 + k4.p) * (ds / 6.0);
    return out;
}

inline double eikonal_defect(const MediumSpec& m, const RayState& s) {
    const double n = eval_n(m, s.x);
    return std::abs(s.p.norm2() - n * n);
}

// endpoint of the ray from (a, b, 0) at arc parameter s_target
RayState shoot(const MediumSpec& m, double a, double b, double s_target, double ds) {
    RayState s{{a, b, 0.0}, {0.0, 0.0, 1.0}};
    double remaining = s_target;
    while (remaining > 0.5 * ds) {
        const double step = std::min(ds, remaining);
        s = rk4_ray(m, s, step);
        remaining -= step;
    }
    if (remaining > 0.0) s = rk4_ray(m, s, remaining);
    return s;
}

// --- joint transport of ray, curvature and amplitude integral ----------------

struct JointState {
    Vec3 x, p;
    Mat3 kappa;
    double amp_int = 0.0;  // integral of tr(kappa)/n^2, feeds A = exp(-I/2)/2
};

struct JointRhs {
    Vec3 dx, dp;
    Mat3 dkappa;
    double damp;
};

inline JointRhs joint_rhs(const MediumSpec& m, const JointState& s) {
    const double n = eval_n(m, s.x);
    const double inv_n2 = 1.0 / (n * n);
    const Vec3 g = eval_grad_n(m, s.x);
    const Mat3 H = eval_hess_n(m, s.x);
    JointRhs r;
    r.dx = s.p * inv_n2;
    r.dp = g * (1.0 / n);
    const Mat3 k2 = s.kappa.square();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r.dkappa(i, j) = inv_n2 * (g[i] * g[j] + n * H(i, j) - k2(i, j));
    r.damp = s.kappa.trace() * inv_n2;
    return r;
}

inline JointState joint_axpy(const JointState& a, double c, const JointRhs& d) {
    JointState out;
    out.x = a.x + d.dx * c;
    out.p = a.p + d.dp * c;
    out.kappa = a.kappa + d.dkappa * c;
    out.amp_int = a.amp_int + c * d.damp;
    return out;
}

inline JointState rk4_joint(const MediumSpec& m, const JointState& s, double ds) {
    const JointRhs k1 = joint_rhs(m, s);
    const JointRhs k2 = joint_rhs(m, joint_axpy(s, 0.5 * ds, k1));
    const JointRhs k3 = joint_rhs(m, joint_axpy(s, 0.5 * ds, k2));
    const JointRhs k4 = joint_rhs(m, joint_axpy(s, ds, k3));
    JointState out = s;
    out.x += (k1.dx + (k2.dx + k3.dx) * 2.0 + k4.dx) * (ds / 6.0);
    out.p += (k1.dp + (k2.dp + k3.dp) * 2.0 + k4.dp) * (ds / 6.0);
    out.kappa += (k1.dkappa + (k2.dkappa + k3.dkappa) * 2.0 + k4.dkappa) * (ds / 6.0);
    out.amp_int += (k1.damp + 2.0 * (k2.damp + k3.damp) + k4.damp) * (ds / 6.0);
    return out;
}

// runs the joint system to s_target; optionally records per-step states and
// the transport trace rate; throws on curvature blowup
struct JointRun {
    JointState end;
    double max_trace_rate = 0.0;
};

template <typename Observer>
JointRun run_joint(const MediumSpec& m, double a, double b, double s_target, double ds,
                   double kappa_cap, Observer observe) {
    JointState s;
    s.x = {a, b, 0.0};
    s.p = {0.0, 0.0, 1.0};
    JointRun run;
    double at = 0.0;
    run.max_trace_rate = std::max(run.max_trace_rate, joint_rhs(m, s).dkappa.trace());
    observe(at, s);
    double remaining = s_target;
    while (remaining > 0.0) {
        const double step = std::min(ds, remaining);
        s = rk4_joint(m, s, step);
        at += step;
        remaining -= step;
        if (s.kappa.max_abs() > kappa_cap)
            throw BlowupDetected("curvature transport exceeded cap " + std::to_string(kappa_cap) +
                                 " at s=" + std::to_string(at) + " on ray from (" +
                                 std::to_string(a) + ", " + std::to_string(b) + ")");
        run.max_trace_rate = std::max(run.max_trace_rate, joint_rhs(m, s).dkappa.trace());
        observe(at, s);
    }
    run.end = s;
    return run;
}

void run_chunked(int count, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || count < 4) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    const int nth = std::min(threads, count);
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (int t = 0; t < nth; ++t)
        pool.emplace_back([&, t]() {
            try {
                for (int i = t; i < count; i += nth) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

GeodesicPath trace_geodesic(const MediumSpec& m, double a, double b, double s_max, double ds,
                            double defect_tol) {
    if (ds <= 0.0) throw StepFailure("ds must be positive");
    GeodesicPath path;
    path.a = a;
    path.b = b;
    path.ds = ds;
    RayState s{{a, b, 0.0}, {0.0, 0.0, 1.0}};
    double at = 0.0;
    path.nodes.push_back({at, s.x, s.p});
    path.eikonal_defect = eikonal_defect(m, s);
    while (at < s_max - 0.5 * ds) {
        s = rk4_ray(m, s, ds);
        at += ds;
        path.nodes.push_back({at, s.x, s.p});
        path.eikonal_defect = std::max(path.eikonal_defect, eikonal_defect(m, s));
    }
    if (path.eikonal_defect > defect_tol)
        throw StepFailure("eikonal defect " + std::to_string(path.eikonal_defect) +
                          " exceeds tolerance " + std::to_string(defect_tol) +
                          "; reduce ds or check medium smoothness");
    return path;
}

std::vector<CurvatureState> transport_curvature(const MediumSpec& m, const GeodesicPath& path,
                                                double kappa_cap) {
    std::vector<CurvatureState> states;
    states.reserve(path.nodes.size());
    const double s_end = path.nodes.back().s;
    run_joint(m, path.a, path.b, s_end, path.ds, kappa_cap,
              [&](double s, const JointState& js) {
                  CurvatureState cs;
                  cs.s = s;
                  cs.kappa = js.kappa;
                  cs.trace_rate = joint_rhs(m, js).dkappa.trace();
                  states.push_back(cs);
              });
    return states;
}

namespace {

struct NewtonResult {
    double s, a, b;
    Vec3 p_end;
    int iters;
};

// damped Newton on the shooting map xi(s, a, b) = target with a ray-bundle
// Jacobian, warm-started from the previous node in the column
NewtonResult solve_node(const MediumSpec& m, const Vec3& target, double s0, double a0, double b0,
                        const ShootingOptions& opts, double X) {
    const double tol = opts.tol_factor * X;
    double s = std::max(s0, 0.0), a = a0, b = b0;
    RayState end = shoot(m, a, b, s, opts.ds);
    Vec3 F = end.x - target;
    double fnorm = F.norm();
    int it = 0;
    while (fnorm > tol) {
        if (++it > opts.max_iter)
            throw RegularityViolation("shooting Newton failed to converge at node (" +
                                      std::to_string(target.x) + ", " + std::to_string(target.y) +
                                      ", " + std::to_string(target.z) + "), residual " +
                                      std::to_string(fnorm));
        // Jacobian columns: d(xi)/ds from the ray itself, d(xi)/da and
        // d(xi)/db from bundle differencing
        const double n_end = eval_n(m, end.x);
        const Vec3 c0 = end.p * (1.0 / (n_end * n_end));
        const double d = opts.fd_delta;
        const Vec3 c1 = (shoot(m, a + d, b, s, opts.ds).x - end.x) * (1.0 / d);
        const Vec3 c2 = (shoot(m, a, b + d, s, opts.ds).x - end.x) * (1.0 / d);
        Vec3 step;
        try {
            step = solve3(c0, c1, c2, F);
        } catch (const RegularityViolation&) {
            throw RegularityViolation(
                "shooting Jacobian is near-singular (caustic suspected) at node (" +
                std::to_string(target.x) + ", " + std::to_string(target.y) + ", " +
                std::to_string(target.z) + ")");
        }
        // backtracking: halve the step until the residual decreases
        double damp = 1.0;
        for (int half = 0; half < 12; ++half) {
            const double s_try = std::max(0.0, s - damp * step.x);
            const double a_try = a - damp * step.y;
            const double b_try = b - damp * step.z;
            const RayState e_try = shoot(m, a_try, b_try, s_try, opts.ds);
            const double f_try = (e_try.x - target).norm();
            if (f_try < fnorm || half == 11) {
                s = s_try;
                a = a_try;
                b = b_try;
                end = e_try;
                F = end.x - target;
                fnorm = f_try;
                break;
            }
            damp *= 0.5;
        }
    }
    return {s, a, b, end.p, it};
}

}  // namespace

TravelTimeField travel_time_field(const MediumSpec& m, const GridSpec& g,
                                  const ShootingOptions& opts) {
    g.validate();
    TravelTimeField tt{SemiDiscreteField(g, 1), SemiDiscreteField(g, 1),
                       {SemiDiscreteField(g, 1), SemiDiscreteField(g, 1), SemiDiscreteField(g, 1)},
                       SemiDiscreteField(g, 1), SemiDiscreteField(g, 1)};
    const int ni = g.n + 2;
    run_chunked(ni * ni, opts.threads, [&](int col) {
        const int i = col / ni, j = col % ni;
        double s_prev = 0.0, a_prev = g.x(i), b_prev = g.y(j);
        for (int k = 0; k < g.z_samples; ++k) {
            const Vec3 target{g.x(i), g.y(j), g.z(k)};
            if (k == 0) {
                tt.tau.at(i, j, 0) = 0.0;
                tt.dz_tau.at(i, j, 0) = 1.0;
                tt.grad[0].at(i, j, 0) = 0.0;
                tt.grad[1].at(i, j, 0) = 0.0;
                tt.grad[2].at(i, j, 0) = 1.0;
                tt.origin_a.at(i, j, 0) = target.x;
                tt.origin_b.at(i, j, 0) = target.y;
                continue;
            }
            // advance the warm start by the local optical path of one z-cell
            const Vec3 mid{target.x, target.y, g.z(k) - 0.5 * g.dz()};
            const double s_guess = s_prev + g.dz() * eval_n(m, mid);
            const NewtonResult r = solve_node(m, target, s_guess, a_prev, b_prev, opts, g.X);
            tt.tau.at(i, j, k) = r.s;
            tt.grad[0].at(i, j, k) = r.p_end.x;
            tt.grad[1].at(i, j, k) = r.p_end.y;
            tt.grad[2].at(i, j, k) = r.p_end.z;
            tt.dz_tau.at(i, j, k) = r.p_end.z;
            tt.origin_a.at(i, j, k) = r.a;
            tt.origin_b.at(i, j, k) = r.b;
            s_prev = r.s;
            a_prev = r.a;
            b_prev = r.b;
        }
    });
    return tt;
}

AmplitudeField amplitude_field(const MediumSpec& m, const GridSpec& g, const TravelTimeField& tt,
                               const ShootingOptions& opts) {
    AmplitudeField amp;
    amp.A = SemiDiscreteField(g, 1);
    amp.A0 = amplitude_floor(m.n0, m.n00);
    const int ni = g.n + 2;
    std::vector<double> col_rate(static_cast<size_t>(ni) * ni, 0.0);
    run_chunked(ni * ni, opts.threads, [&](int col) {
        const int i = col / ni, j = col % ni;
        double rate = 0.0;
        for (int k = 0; k < g.z_samples; ++k) {
            if (k == 0) {
                amp.A.at(i, j, 0) = 0.5;
                continue;
            }
            const double s = tt.tau.at(i, j, k);
            const JointRun run = run_joint(m, tt.origin_a.at(i, j, k), tt.origin_b.at(i, j, k), s,
                                           opts.ds, opts.kappa_cap, [](double, const JointState&) {});
            amp.A.at(i, j, k) = 0.5 * std::exp(-0.5 * run.end.amp_int);
            rate = std::max(rate, run.max_trace_rate);
        }
        col_rate[col] = rate;
    });
    amp.max_trace_rate = *std::max_element(col_rate.begin(), col_rate.end());
    amp.min_A = amp.A.v[0];
    for (double v : amp.A.v) amp.min_A = std::min(amp.min_A, v);
    amp.floor_ok = amp.min_A >= amp.A0 - 1e-12;
    return amp;
}

namespace {

// clamped trilinear interpolation of a static field
double interp3(const SemiDiscreteField& f, const Vec3& x) {
    const GridSpec& g = f.grid;
    const double fi = (x.x + g.X) / g.h();
    const double fj = (x.y + g.X) / g.h();
    const double fk = x.z / g.dz();
    const auto clamped = [](double v, int n) {
        return std::min(std::max(v, 0.0), static_cast<double>(n - 1) - 1e-12);
    };
    const double ci = clamped(fi, f.ni), cj = clamped(fj, f.nj), ck = clamped(fk, f.nz);
    const int i0 = static_cast<int>(ci), j0 = static_cast<int>(cj), k0 = static_cast<int>(ck);
    const double u = ci - i0, v = cj - j0, w = ck - k0;
    double out = 0.0;
    for (int di = 0; di < 2; ++di)
        for (int dj = 0; dj < 2; ++dj)
            for (int dk = 0; dk < 2; ++dk) {
                const double wgt = (di ? u : 1.0 - u) * (dj ? v : 1.0 - v) * (dk ? w : 1.0 - w);
                out += wgt * f.at(std::min(i0 + di, f.ni - 1), std::min(j0 + dj, f.nj - 1),
                                  std::min(k0 + dk, f.nz - 1));
            }
    return out;
}

// discrete Laplacian with one-sided transverse closures on the boundary
// layers, so the driving term of the amplitude recursion exists everywhere
SemiDiscreteField laplacian_full(const SemiDiscreteField& f) {
    SemiDiscreteField out = op_dzz(f);
    const double c = 1.0 / (f.grid.h() * f.grid.h());
    const int ni = f.ni, nj = f.nj;
    for (int i = 0; i < ni; ++i)
        for (int j = 0; j < nj; ++j)
            for (int k = 0; k < f.nz; ++k) {
                double dxx, dyy;
                if (i == 0)
                    dxx = c * (2.0 * f.at(0, j, k) - 5.0 * f.at(1, j, k) + 4.0 * f.at(2, j, k) -
                               f.at(3, j, k));
                else if (i == ni - 1)
                    dxx = c * (2.0 * f.at(ni - 1, j, k) - 5.0 * f.at(ni - 2, j, k) +
                               4.0 * f.at(ni - 3, j, k) - f.at(ni - 4, j, k));
                else
                    dxx = c * (f.at(i + 1, j, k) - 2.0 * f.at(i, j, k) + f.at(i - 1, j, k));
                if (j == 0)
                    dyy = c * (2.0 * f.at(i, 0, k) - 5.0 * f.at(i, 1, k) + 4.0 * f.at(i, 2, k) -
                               f.at(i, 3, k));
                else if (j == nj - 1)
                    dyy = c * (2.0 * f.at(i, nj - 1, k) - 5.0 * f.at(i, nj - 2, k) +
                               4.0 * f.at(i, nj - 3, k) - f.at(i, nj - 4, k));
                else
                    dyy = c * (f.at(i, j + 1, k) - 2.0 * f.at(i, j, k) + f.at(i, j - 1, k));
                out.at(i, j, k) += dxx + dyy;
            }
    return out;
}

}  // namespace

void higher_amplitudes(const MediumSpec& m, const GridSpec& g, const TravelTimeField& tt,
                       AmplitudeField& amp, int r_trunc, const ShootingOptions& opts) {
    if (r_trunc < 0 || r_trunc > 2)
        throw ConfigError("expansion truncation order must be 0, 1 or 2");
    amp.alphas.clear();
    const int ni = g.n + 2;
    SemiDiscreteField prev = amp.A;  // alpha_0
    for (int order = 1; order <= r_trunc; ++order) {
        const SemiDiscreteField drive = laplacian_full(prev);
        SemiDiscreteField alpha(g, 1);
        run_chunked(ni * ni, opts.threads, [&](int col) {
            const int i = col / ni, j = col % ni;
            for (int k = 1; k < g.z_samples; ++k) {
                const double s = tt.tau.at(i, j, k);
                double accum = 0.0;
                double last_s = 0.0, last_f = 0.0;
                bool first = true;
                const JointRun run = run_joint(
                    m, tt.origin_a.at(i, j, k), tt.origin_b.at(i, j, k), s, opts.ds, opts.kappa_cap,
                    [&](double at, const JointState& js) {
                        const double n = eval_n(m, js.x);
                        const double a0 = 0.5 * std::exp(-0.5 * js.amp_int);
                        const double f = interp3(drive, js.x) / (n * n * a0);
                        if (!first) accum += 0.5 * (f + last_f) * (at - last_s);
                        first = false;
                        last_s = at;
                        last_f = f;
                    });
                alpha.at(i, j, k) =
                    0.5 * (0.5 * std::exp(-0.5 * run.end.amp_int)) * accum;
            }
            // alpha_k vanishes on the source plane
            for (int kk : {0}) alpha.at(i, j, kk) = 0.0;
        });
        amp.alphas.push_back(alpha);
        prev = alpha;
    }
}

RegularityReport check_regularity(const MediumSpec& m, double fan_extent, int fan_per_axis,
                                  double s_max, const ShootingOptions& opts, double det_floor) {
    RegularityReport rep;
    rep.det_floor = det_floor;
    const double d = opts.fd_delta;
    for (int ia = 0; ia < fan_per_axis; ++ia)
        for (int ib = 0; ib < fan_per_axis; ++ib) {
            const double a = fan_per_axis == 1 ? 0.0
                                               : -fan_extent + 2.0 * fan_extent * ia / (fan_per_axis - 1);
            const double b = fan_per_axis == 1 ? 0.0
                                               : -fan_extent + 2.0 * fan_extent * ib / (fan_per_axis - 1);
            ++rep.rays;
            RayState r0{{a, b, 0.0}, {0.0, 0.0, 1.0}};
            RayState r1{{a + d, b, 0.0}, {0.0, 0.0, 1.0}};
            RayState r2{{a, b + d, 0.0}, {0.0, 0.0, 1.0}};
            double at = 0.0;
            while (at < s_max) {
                r0 = rk4_ray(m, r0, opts.ds);
                r1 = rk4_ray(m, r1, opts.ds);
                r2 = rk4_ray(m, r2, opts.ds);
                at += opts.ds;
                const double n = eval_n(m, r0.x);
                const Vec3 c0 = r0.p * (1.0 / (n * n));
                const Vec3 c1 = (r1.x - r0.x) * (1.0 / d);
                const Vec3 c2 = (r2.x - r0.x) * (1.0 / d);
                const double dt = std::abs(det3(c0, c1, c2));
                if (dt < rep.min_det) {
                    rep.min_det = dt;
                    rep.worst_x0 = {a, b, 0.0};
                    rep.worst_s = at;
                }
            }
        }
    rep.pass = rep.min_det >= det_floor;
    if (!rep.pass)
        rep.note = "shooting-map determinant dropped to " + std::to_string(rep.min_det) +
                   " at s=" + std::to_string(rep.worst_s) + " (caustic suspected)";
    return rep;
}

double max_trace_rate_over_fan(const MediumSpec& m, double fan_extent, int fan_per_axis,
                               double s_max, const ShootingOptions& opts) {
    double rate = 0.0;
    for (int ia = 0; ia < fan_per_axis; ++ia)
        for (int ib = 0; ib < fan_per_axis; ++ib) {
            const double a = fan_per_axis == 1 ? 0.0
                                               : -fan_extent + 2.0 * fan_extent * ia / (fan_per_axis - 1);
            const double b = fan_per_axis == 1 ? 0.0
                                               : -fan_extent + 2.0 * fan_extent * ib / (fan_per_axis - 1);
            const JointRun run =
                run_joint(m, a, b, s_max, opts.ds, opts.kappa_cap, [](double, const JointState&) {});
            rate = std::max(rate, run.max_trace_rate);
        }
    return rate;
}

}  // namespace pwcip
