#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pwcip {

// ---------------------------------------------------------------------------
// Error hierarchy. Every failure mode carries a human-readable message and,
// where useful, the offending location or quantity baked into the string.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationFailure : Error { using Error::Error; };
struct StepFailure : Error { using Error::Error; };
struct RegularityViolation : Error { using Error::Error; };
struct BlowupDetected : Error { using Error::Error; };
struct CFLViolation : Error { using Error::Error; };
struct BudgetExceeded : Error { using Error::Error; };
struct HorizonTooShort : Error { using Error::Error; };
struct DomainMismatch : Error { using Error::Error; };
struct FloorViolation : Error { using Error::Error; };
struct NonDecrease : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Small fixed-size linear algebra. Enough for ray tracing and 3x3 shooting
// systems; anything larger lives in flat std::vector fields.
// ---------------------------------------------------------------------------

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double a) const { return {a * x, a * y, a * z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec3 operator*(double a, const Vec3& v) { return v * a; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

// Symmetric 3x3 matrix stored dense; symmetry maintained by construction in
// the curvature transport, asserted in tests.
struct Mat3 {
    std::array<std::array<double, 3>, 3> m{};

    double& operator()(int i, int j) { return m[i][j]; }
    double operator()(int i, int j) const { return m[i][j]; }

    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] + o.m[i][j];
        return r;
    }
    Mat3 operator*(double a) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = a * m[i][j];
        return r;
    }
    Mat3& operator+=(const Mat3& o) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m[i][j] += o.m[i][j];
        return *this;
    }

    double trace() const { return m[0][0] + m[1][1] + m[2][2]; }
    double max_abs() const {
        double r = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r = std::max(r, std::abs(m[i][j]));
        return r;
    }

    // A * A for symmetric A
    Mat3 square() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += m[i][k] * m[k][j];
                r.m[i][j] = s;
            }
        return r;
    }
};

inline double det3(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
    return c0.dot(cross(c1, c2));
}

// Solve [c0 c1 c2] u = rhs by Cramer's rule; throws on singular matrix.
inline Vec3 solve3(const Vec3& c0, const Vec3& c1, const Vec3& c2, const Vec3& rhs,
                   double det_tol = 1e-14) {
    const double d = det3(c0, c1, c2);
    if (std::abs(d) < det_tol)
        throw RegularityViolation("3x3 system is singular (det=" + std::to_string(d) + ")");
    return {det3(rhs, c1, c2) / d, det3(c0, rhs, c2) / d, det3(c0, c1, rhs) / d};
}

}  // namespace pwcip
