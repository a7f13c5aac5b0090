#pragma once

#include <string>
#include <vector>

#include "pwcip/carleman.hpp"
#include "pwcip/forward.hpp"
#include "pwcip/grid.hpp"

namespace pwcip {

// ---------------------------------------------------------------------------
// The reduced boundary value problem posed as weighted constrained least
// squares: minimize the weighted residuals of the nonlocal 2x2 system over
// the admissible box, with the boundary data entering as penalties.
//
// tau is optimized through its z-slope samples, so the slope bounds
// 1 <= dz tau <= n0 become literal box constraints and tau(z=0) = 0 holds by
// construction. The transverse-gradient cap is not enforced directly; the
// slope and value boxes stand in for it.
// ---------------------------------------------------------------------------

struct AdmissibleSet {
    double M = 5.0;    // cap on |w| and |tau| node values
    double n0 = 1.2;   // slope box upper end (lower end is 1)
    double A0 = 0.0;   // floor for w(.,0); set from the medium constants
};

struct SolverOptions {
    double lambda = 0.5;      // weight exponent of the residual terms
    double alpha = 5.0 / 9.0; // weight time slope
    double beta = -1.0;       // boundary penalty; < 0 means 100 lambda^3
    double w_r1 = 1.0, w_r2 = 1.0;
    double sigma_smooth = 1.0;  // quadratic damping of grad_h(dz tau); stands in
                                // for the norm cap of the admissible set
    int max_iter = 2500;
    double tol = 1e-7;        // sup norm of the projected gradient
    int lbfgs_m = 10;
    int max_backtracks = 40;
    enum class Init { Flat, DataExtension } init = Init::Flat;

    double beta_eff() const {
        return beta >= 0.0 ? beta : 100.0 * lambda * lambda * lambda;
    }
};

struct InversionProblem {
    GridSpec grid;
    TransformedData data;
    CarlemanParams carleman;  // reporting: xi bounds for the weighted estimate
    AdmissibleSet set;
    SolverOptions opts;
};

// residuals of the nonlocal system at a trial pair; FloorViolation if the
// t=0 slice of w dips below A0 anywhere
std::pair<SemiDiscreteField, SemiDiscreteField> residuals(const SemiDiscreteField& w,
                                                          const SemiDiscreteField& tau,
                                                          const GridSpec& g, double A0);

struct ObjectiveEval {
    double J = 0.0;
    double r1_term = 0.0, r2_term = 0.0, boundary_term = 0.0;
    SemiDiscreteField grad_w;    // with respect to the w node values
    SemiDiscreteField grad_tau;  // with respect to the tau node values
};

ObjectiveEval objective(const SemiDiscreteField& w, const SemiDiscreteField& tau,
                        const InversionProblem& prob);

struct IterRecord {
    int iter;
    double J;
    double pg_norm;
    double step;
    int backtracks;
};

enum class SolveStatus { Converged, MaxIterations, LineSearchFailure };

struct InversionResult {
    SemiDiscreteField w_hat;
    SemiDiscreteField tau_hat;
    SemiDiscreteField sigma_hat;  // slope samples actually optimized
    SemiDiscreteField n_hat;      // |grad_h tau_hat| at interior nodes
    double J_final = 0.0;
    double r1_norm = 0.0, r2_norm = 0.0;  // unweighted L2 residual norms
    int iterations = 0;
    int active_bounds = 0;
    SolveStatus status = SolveStatus::Converged;
    std::vector<IterRecord> trace;
};

InversionResult minimize(const InversionProblem& prob);

// node-wise |grad_h tau| at interior transverse indices; zero-gradient nodes
// are counted in *flagged when provided
SemiDiscreteField recover_n(const SemiDiscreteField& tau, const GridSpec& g,
                            int* flagged = nullptr);

// tau node values from slope samples: trapezoid accumulation from tau(z=0)=0
SemiDiscreteField tau_from_sigma(const SemiDiscreteField& sigma);

}  // namespace pwcip
