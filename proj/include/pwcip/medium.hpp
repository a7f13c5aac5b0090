#pragma once

#include <string>
#include <vector>

#include "pwcip/types.hpp"

namespace pwcip {

// ---------------------------------------------------------------------------
// Analytic refractive-index models. All are built as
//     n(x) = 1 + amplitude * s(z) * q(x) * q(y)
// with a quintic smoothstep profile s and a transverse window q that equals 1
// on an inner box and falls smoothly to 0 before |x| = X. This gives n = 1 on
// and below the source plane, n = 1 outside the transverse box, dz n = 0 at
// z = 0, and closed-form first and second derivatives.
//
// The "layered" model drops the window (q == 1 everywhere): a diagnostic mode
// that intentionally extends the profile across the lateral boundary; it
// admits exact travel times by 1-D quadrature and is flagged as such by the
// validator.
// ---------------------------------------------------------------------------

enum class MediumModel { Constant, Layered, Bump };

struct MediumSpec {
    MediumModel model = MediumModel::Constant;
    double amplitude = 0.0;      // profile amplitude; n ranges in [1, 1+amplitude]
    double window_inner = 0.3;   // |x| below which the window is exactly 1
    double window_outer = 1.0;   // |x| above which the window is exactly 0
    double n0 = 1.0;             // declared upper bound on n, 1 < n0 < n00
    double n00 = 1.0;            // declared C^2-norm bound
    double X = 1.125;            // transverse half-width of the support box
    bool monotone_z = true;      // declares dz n >= 0 everywhere

    std::string model_name() const {
        switch (model) {
            case MediumModel::Constant: return "constant";
            case MediumModel::Layered: return "layered";
            default: return "bump";
        }
    }

    static MediumSpec constant() {
        MediumSpec m;
        m.model = MediumModel::Constant;
        m.n0 = 1.2;
        m.n00 = 1.5;
        return m;
    }
    static MediumSpec layered(double amplitude, double n0 = 1.2, double n00 = 1.5) {
        MediumSpec m;
        m.model = MediumModel::Layered;
        m.amplitude = amplitude;
        m.n0 = n0;
        m.n00 = n00;
        m.monotone_z = amplitude >= 0.0;
        return m;
    }
    static MediumSpec bump(double amplitude, double inner = 0.3, double outer = 1.0,
                           double n0 = 1.2, double n00 = 1.5, double X = 1.125) {
        MediumSpec m;
        m.model = MediumModel::Bump;
        m.amplitude = amplitude;
        m.window_inner = inner;
        m.window_outer = outer;
        m.n0 = n0;
        m.n00 = n00;
        m.X = X;
        m.monotone_z = amplitude >= 0.0;
        return m;
    }
};

// quintic smoothstep: s(0)=s'(0)=s''(0)=0, s(1)=1, s'(1)=s''(1)=0
double smoothstep(double z);
double smoothstep_d1(double z);
double smoothstep_d2(double z);

double eval_n(const MediumSpec& m, const Vec3& x);
Vec3 eval_grad_n(const MediumSpec& m, const Vec3& x);
Mat3 eval_hess_n(const MediumSpec& m, const Vec3& x);

struct MediumCheck {
    std::string name;
    bool pass = true;
    bool waived = false;      // violated by design in diagnostic mode
    double worst = 0.0;       // worst sampled value of the checked quantity
    Vec3 worst_at;            // location of the worst sample
    std::string detail;
};

struct MediumReport {
    std::vector<MediumCheck> checks;
    bool diagnostic_mode = false;  // layered profile without transverse support

    bool passed() const {
        for (const auto& c : checks)
            if (!c.pass && !c.waived) return false;
        return true;
    }
};

// Samples the model densely (sample_density points per unit length per axis,
// at least 8) and checks the admissibility conditions: value range, support,
// derivative bounds, monotonicity, flatness of dz n on the source plane.
MediumReport validate_medium(const MediumSpec& m, int sample_density = 8);

// throws ValidationFailure with the first violated condition
void require_valid(const MediumSpec& m, int sample_density = 8);

}  // namespace pwcip
