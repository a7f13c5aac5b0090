#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pwcip/grid.hpp"

namespace pwcip {

// ---------------------------------------------------------------------------
// Weighted energy functionals: both sides of the two weighted estimates for
// the operators  L v = lap_h v - xi v_zt  and  lap_h v  with the weight
// exp(-2 lambda (z + alpha t)). The estimates hold with existential constants,
// so verification is a feasibility search: the largest uniform constant and
// the smallest lambda past which the positive groups dominate.
//
// z/t integrals use a product-trapezoid rule with exact exponential moments
// per cell, second order uniformly in lambda.
// ---------------------------------------------------------------------------

struct CarlemanParams {
    double lambda = 1.0;  // weight exponent, >= 1 in the estimates
    double alpha = 0.5;   // time slope, constrained to (0, 2/(3 xi1)]
    double xi0 = 1.0, xi1 = 1.0, xi2 = 0.0;  // bounds on the coefficient field

    double alpha0() const { return 2.0 / (3.0 * xi1); }
    void validate() const {
        if (!(xi0 > 0.0) || xi0 > xi1) throw ConfigError("need 0 < xi0 <= xi1");
        if (alpha <= 0.0 || alpha > alpha0() + 1e-12)
            throw ConfigError("alpha must lie in (0, 2/(3 xi1)]");
    }
};

inline double carleman_weight(double z, double t, const CarlemanParams& p) {
    return std::exp(-2.0 * p.lambda * (z + p.alpha * t));
}

// checks the coefficient bounds (xi0 <= xi <= xi1, |xi_z| <= xi2) on a field
void check_xi_bounds(const SemiDiscreteField& xi, const CarlemanParams& p);

struct C4Groups {
    double pos_interior = 0.0;  // lambda-weighted H1-type bulk group
    double pos_t0 = 0.0;        // lambda-weighted group on the t=0 slice
    double neg_terminal = 0.0;  // exp(-2 lambda alpha T1)-damped terminal group
    double neg_theta = 0.0;     // lateral trace
    double neg_gamma = 0.0;     // z=0 trace group

    double dominance() const {
        return pos_interior + pos_t0 - neg_terminal - neg_theta - neg_gamma;
    }
};

struct C6Groups {
    double pos_interior = 0.0;
    double neg_theta = 0.0;
    double neg_gamma = 0.0;

    double dominance() const { return pos_interior - neg_theta - neg_gamma; }
};

double lhs_c4(const SemiDiscreteField& v, const SemiDiscreteField& xi, const CarlemanParams& p);
C4Groups rhs_groups_c4(const SemiDiscreteField& v, const CarlemanParams& p);

double lhs_c6(const SemiDiscreteField& v, const CarlemanParams& p);
C6Groups rhs_groups_c6(const SemiDiscreteField& v, const CarlemanParams& p);

// --- verification -------------------------------------------------------------

enum class FieldFamily { Clean, GammaSupported, ThetaSupported };

struct TestField {
    std::string name;
    FieldFamily family;
    std::function<double(double, double, double, double)> fn;  // (x, y, z, t)
};

// three families: traces all clean, z=0-supported, lateral-supported
std::vector<TestField> default_field_suite(double X, double T1);

enum class Estimate { C4, C6 };

struct EstimateSample {
    std::string field;
    FieldFamily family;
    double lambda = 0.0;
    double lhs = 0.0;
    double pos = 0.0, pos_t0 = 0.0, neg = 0.0;  // grouped sides
    double dominance = 0.0;                     // pos + pos_t0 - neg
    double rho = -1.0;                          // lhs / dominance when positive
};

struct SlopeFit {
    std::string field;
    double slope = 0.0;      // d log(lhs / H1-group) / d log(lambda)
    double intercept = 0.0;
};

struct VerifyReport {
    Estimate which = Estimate::C4;
    std::vector<EstimateSample> samples;
    std::vector<SlopeFit> clean_slopes;
    double min_clean_slope = 0.0;
    double lambda0_emp = 0.0;   // smallest grid lambda with clean dominance beyond it
    bool lambda0_found = false;
    double best_C = 0.0;        // largest C with lhs >= C * dominance past lambda0
    std::vector<double> inf_rho_per_lambda;
    std::vector<double> lambda_grid;
};

VerifyReport verify_estimate(Estimate which, const std::vector<TestField>& suite,
                             const std::vector<double>& lambda_grid, CarlemanParams base,
                             const GridSpec& grid);

}  // namespace pwcip
