#pragma once

#include <functional>
#include <vector>

#include "pwcip/types.hpp"

namespace pwcip {

// ---------------------------------------------------------------------------
// Semi-discrete grid: finite differences in the two transverse directions
// (step h = 2X/(N+1), bounded below by h0), uniform samplings of the
// continuous z and t axes. Interior transverse indices are 1..N; the layers
// i,j in {0, N+1} sit on the lateral boundary and feed both the lateral
// traces and the stencils at i,j = 1 and N.
// ---------------------------------------------------------------------------

struct GridSpec {
    int n = 8;             // interior nodes per transverse axis
    double X = 1.125;      // transverse half-width; h = 2X/(n+1)
    double h0 = 0.1;       // lower bound on h
    int z_samples = 41;    // sampling of z in [0,1]
    int t_samples = 61;    // sampling of t in [0,T1]
    double T1 = 3.0;       // reduced time horizon
    double t1 = 1.0;       // stability window (norms over (0,t1))

    double h() const { return 2.0 * X / (n + 1); }
    double x(int i) const { return -X + i * h(); }
    double y(int j) const { return -X + j * h(); }
    double dz() const { return 1.0 / (z_samples - 1); }
    double z(int k) const { return k * dz(); }
    double dt() const { return T1 / (t_samples - 1); }
    double t(int l) const { return l * dt(); }

    void validate() const {
        if (n < 1) throw ConfigError("grid.n must be >= 1");
        if (X <= 0.0) throw ConfigError("grid.X must be > 0");
        if (h() < h0)
            throw ConfigError("grid step h=" + std::to_string(h()) +
                              " below floor h0=" + std::to_string(h0));
        if (z_samples < 5 || t_samples < 5)
            throw ConfigError("grid z/t samplings must have at least 5 points");
        if (T1 <= 0.0 || t1 <= 0.0 || t1 > T1)
            throw ConfigError("horizons must satisfy 0 < t1 <= T1");
    }

    bool same_layout(const GridSpec& o) const {
        return n == o.n && z_samples == o.z_samples && X == o.X;
    }
};

// Values indexed by (i, j, z-sample, t-sample); nt == 1 for static fields.
class SemiDiscreteField {
  public:
    SemiDiscreteField() = default;
    SemiDiscreteField(const GridSpec& g, int nt_)
        : grid(g), ni(g.n + 2), nj(g.n + 2), nz(g.z_samples), nt(nt_),
          v(static_cast<size_t>(ni) * nj * nz * nt_, 0.0) {}

    double& at(int i, int j, int k, int l = 0) {
        return v[((static_cast<size_t>(i) * nj + j) * nz + k) * nt + l];
    }
    double at(int i, int j, int k, int l = 0) const {
        return v[((static_cast<size_t>(i) * nj + j) * nz + k) * nt + l];
    }

    bool is_static() const { return nt == 1; }
    size_t size() const { return v.size(); }

    // t = 0 slice as a static field
    SemiDiscreteField slice_t0() const {
        SemiDiscreteField s(grid, 1);
        for (int i = 0; i < ni; ++i)
            for (int j = 0; j < nj; ++j)
                for (int k = 0; k < nz; ++k) s.at(i, j, k) = at(i, j, k, 0);
        return s;
    }

    GridSpec grid;
    int ni = 0, nj = 0, nz = 0, nt = 1;
    std::vector<double> v;
};

// Trace on the source-side face z = 0, interior transverse indices only.
// Traces carry their own time step: measured data live on the wave field's
// grid, reduced data on the (0, T1) grid.
class GammaTrace {
  public:
    GammaTrace() = default;
    GammaTrace(const GridSpec& g, int nt_, double dt_ = -1.0)
        : grid(g), n(g.n), nt(nt_), dt(dt_ > 0.0 ? dt_ : g.dt()),
          v(static_cast<size_t>(g.n) * g.n * nt_, 0.0) {}

    double& at(int i, int j, int l = 0) {  // i, j in 1..N
        return v[(static_cast<size_t>(i - 1) * n + (j - 1)) * nt + l];
    }
    double at(int i, int j, int l = 0) const {
        return v[(static_cast<size_t>(i - 1) * n + (j - 1)) * nt + l];
    }

    GridSpec grid;
    int n = 0, nt = 1;
    double dt = 0.0;
    std::vector<double> v;
};

// Trace on the four lateral faces. face 0: x=-X, 1: x=+X, 2: y=-X, 3: y=+X;
// m runs over the full transverse range 0..N+1 of the other coordinate, so
// corner nodes appear on two faces (with equal values when extracted from a
// volume field); the lateral norm counts them twice, matching its definition
// as two separate face sums.
class ThetaTrace {
  public:
    ThetaTrace() = default;
    ThetaTrace(const GridSpec& g, int nt_, double dt_ = -1.0)
        : grid(g), nm(g.n + 2), nz(g.z_samples), nt(nt_), dt(dt_ > 0.0 ? dt_ : g.dt()),
          v(static_cast<size_t>(4) * (g.n + 2) * g.z_samples * nt_, 0.0) {}

    double& at(int face, int m, int k, int l = 0) {
        return v[((static_cast<size_t>(face) * nm + m) * nz + k) * nt + l];
    }
    double at(int face, int m, int k, int l = 0) const {
        return v[((static_cast<size_t>(face) * nm + m) * nz + k) * nt + l];
    }

    // transverse coordinates of a face node
    void node_xy(int face, int m, double& x, double& y) const {
        switch (face) {
            case 0: x = -grid.X; y = grid.y(m); break;
            case 1: x = grid.X; y = grid.y(m); break;
            case 2: x = grid.x(m); y = -grid.X; break;
            default: x = grid.x(m); y = grid.X; break;
        }
    }

    GridSpec grid;
    int nm = 0, nz = 0, nt = 1;
    double dt = 0.0;
    std::vector<double> v;
};

// Build helpers ------------------------------------------------------------

SemiDiscreteField make_field(const GridSpec& g, int nt,
                             const std::function<double(double, double, double, double)>& f);
SemiDiscreteField make_static_field(const GridSpec& g,
                                    const std::function<double(double, double, double)>& f);
GammaTrace extract_gamma(const SemiDiscreteField& f);
ThetaTrace extract_theta(const SemiDiscreteField& f);

// Difference operators ------------------------------------------------------
// Transverse first/second differences are defined at interior i,j = 1..N and
// zero on the boundary layers of the output. z and t derivatives use centered
// stencils with second-order one-sided closures at the ends.

SemiDiscreteField op_dx(const SemiDiscreteField& f);
SemiDiscreteField op_dy(const SemiDiscreteField& f);
SemiDiscreteField op_dxx(const SemiDiscreteField& f);
SemiDiscreteField op_dyy(const SemiDiscreteField& f);
SemiDiscreteField op_dz(const SemiDiscreteField& f);
SemiDiscreteField op_dzz(const SemiDiscreteField& f);
SemiDiscreteField op_dt(const SemiDiscreteField& f);
SemiDiscreteField op_dzt(const SemiDiscreteField& f);
SemiDiscreteField laplacian_h(const SemiDiscreteField& f);
std::array<SemiDiscreteField, 3> grad_h(const SemiDiscreteField& f);

// Adjoints with respect to the plain (unweighted) node-wise dot product.
// Used by the inversion gradient; adjointness is property-tested.
SemiDiscreteField adj_dx(const SemiDiscreteField& g);
SemiDiscreteField adj_dy(const SemiDiscreteField& g);
SemiDiscreteField adj_dxx(const SemiDiscreteField& g);
SemiDiscreteField adj_dyy(const SemiDiscreteField& g);
SemiDiscreteField adj_dz(const SemiDiscreteField& g);
SemiDiscreteField adj_dzz(const SemiDiscreteField& g);
SemiDiscreteField adj_dt(const SemiDiscreteField& g);

// Norms ----------------------------------------------------------------------
// Literal transcriptions of the semi-discrete norms: transverse sums carry h^2
// over interior nodes for volume norms and for the H1 trace norm at z=0, a
// single h for the L2 trace norms at z=0 and on the lateral faces; z and t
// integrals are composite trapezoid on the samplings.

enum class Norm { H2h_Q, H1h_Q, H1h_Omega, L2h_Omega, C2h, Cnh };

double norm_sq(const SemiDiscreteField& f, Norm which);
inline double norm(const SemiDiscreteField& f, Norm which) {
    if (which == Norm::C2h || which == Norm::Cnh) return norm_sq(f, which);
    return std::sqrt(norm_sq(f, which));
}

// H1 norm over the windowed cylinder (t integrated over (0, t_max) only).
double norm_sq_H1h_Q_window(const SemiDiscreteField& f, double t_max);

double norm_sq_H1h_Gamma(const GammaTrace& g);
double norm_sq_L2h_Gamma(const GammaTrace& g);
double norm_sq_L2h_Theta(const ThetaTrace& g);         // z and t integrals
double norm_sq_L2h_Theta_static(const ThetaTrace& g);  // z integral only

inline double norm_H1h_Gamma(const GammaTrace& g) { return std::sqrt(norm_sq_H1h_Gamma(g)); }
inline double norm_L2h_Gamma(const GammaTrace& g) { return std::sqrt(norm_sq_L2h_Gamma(g)); }
inline double norm_L2h_Theta(const ThetaTrace& g) { return std::sqrt(norm_sq_L2h_Theta(g)); }
inline double norm_L2h_Theta_static(const ThetaTrace& g) {
    return std::sqrt(norm_sq_L2h_Theta_static(g));
}

// sup norm of |f| over all stored nodes (diagnostics)
double max_abs(const SemiDiscreteField& f);

// trapezoid weight for sample k of m samples
inline double trapz_w(int k, int m) { return (k == 0 || k == m - 1) ? 0.5 : 1.0; }

}  // namespace pwcip
