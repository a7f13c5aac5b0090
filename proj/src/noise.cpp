#include "pwcip/noise.hpp"

#include <cmath>
#include <random>

namespace pwcip {

namespace {

// platform-independent uniform in [-1, 1): raw engine words mapped directly
struct CoefStream {
    std::mt19937_64 rng;
    explicit CoefStream(uint64_t seed) : rng(seed) {}
    double next() {
        const uint64_t x = rng();
        return 2.0 * ((x >> 11) * 0x1.0p-53) - 1.0;
    }
};

uint64_t mix(uint64_t seed, uint64_t salt) {
    uint64_t h = seed ^ (0x9e3779b97f4a7c15ull + salt);
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ull;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebull;
    h ^= h >> 31;
    return h;
}

struct ModeBasis {
    double X, T1;
    int modes;

    double bx(int p, double x) const { return std::cos(p * M_PI * (x + X) / (2.0 * X)); }
    double bt(int r, double t) const { return std::cos(r * M_PI * t / T1); }
    double bz(int r, double z) const { return std::cos(r * M_PI * z); }
};

}  // namespace

TransformedData inject_noise(const TransformedData& data, double delta, uint64_t seed,
                             int modes) {
    if (delta <= 0.0 || delta >= 1.0)
        throw ConfigError("noise level delta must lie in (0, 1), got " + std::to_string(delta));
    const GridSpec& g = data.grid;
    const ModeBasis basis{g.X, g.T1, modes};

    TransformedData out = data;

    // trace at z=0, measured in the H1 trace norm
    {
        CoefStream cs(mix(seed, 0));
        std::vector<double> coef;
        for (int p = 0; p <= modes; ++p)
            for (int q = 0; q <= modes; ++q)
                for (int r = 0; r <= modes; ++r) coef.push_back(cs.next());
        GammaTrace eta(g, data.g0.nt, data.g0.dt);
        for (int i = 1; i <= g.n; ++i)
            for (int j = 1; j <= g.n; ++j)
                for (int l = 0; l < eta.nt; ++l) {
                    double s = 0.0;
                    size_t c = 0;
                    for (int p = 0; p <= modes; ++p)
                        for (int q = 0; q <= modes; ++q)
                            for (int r = 0; r <= modes; ++r)
                                s += coef[c++] * basis.bx(p, g.x(i)) * basis.bx(q, g.y(j)) *
                                     basis.bt(r, l * eta.dt);
                    eta.at(i, j, l) = s;
                }
        const double scale = 0.9 * delta / norm_H1h_Gamma(eta);
        for (size_t q = 0; q < eta.v.size(); ++q) out.g0.v[q] += scale * eta.v[q];
    }

    // slope trace at z=0, measured in the plain trace norm
    {
        CoefStream cs(mix(seed, 1));
        std::vector<double> coef;
        for (int p = 0; p <= modes; ++p)
            for (int q = 0; q <= modes; ++q)
                for (int r = 0; r <= modes; ++r) coef.push_back(cs.next());
        GammaTrace eta(g, data.g1.nt, data.g1.dt);
        for (int i = 1; i <= g.n; ++i)
            for (int j = 1; j <= g.n; ++j)
                for (int l = 0; l < eta.nt; ++l) {
                    double s = 0.0;
                    size_t c = 0;
                    for (int p = 0; p <= modes; ++p)
                        for (int q = 0; q <= modes; ++q)
                            for (int r = 0; r <= modes; ++r)
                                s += coef[c++] * basis.bx(p, g.x(i)) * basis.bx(q, g.y(j)) *
                                     basis.bt(r, l * eta.dt);
                    eta.at(i, j, l) = s;
                }
        const double scale = 0.9 * delta / norm_L2h_Gamma(eta);
        for (size_t q = 0; q < eta.v.size(); ++q) out.g1.v[q] += scale * eta.v[q];
    }

    // lateral trace, measured in the lateral norm; a function of the global
    // coordinates so the two faces meeting at a corner perturb consistently
    {
        CoefStream cs(mix(seed, 2));
        std::vector<double> coef;
        for (int p = 0; p <= modes; ++p)
            for (int q = 0; q <= modes; ++q)
                for (int r = 0; r <= modes; ++r)
                    for (int s2 = 0; s2 <= modes; ++s2) coef.push_back(cs.next());
        ThetaTrace eta(g, data.g2.nt, data.g2.dt);
        for (int face = 0; face < 4; ++face)
            for (int m = 0; m < eta.nm; ++m) {
                double x, y;
                eta.node_xy(face, m, x, y);
                for (int k = 0; k < eta.nz; ++k)
                    for (int l = 0; l < eta.nt; ++l) {
                        double s = 0.0;
                        size_t c = 0;
                        for (int p = 0; p <= modes; ++p)
                            for (int q = 0; q <= modes; ++q)
                                for (int r = 0; r <= modes; ++r)
                                    for (int s2 = 0; s2 <= modes; ++s2)
                                        s += coef[c++] * basis.bx(p, x) * basis.bx(q, y) *
                                             basis.bz(r, g.z(k)) * basis.bt(s2, l * eta.dt);
                        eta.at(face, m, k, l) = s;
                    }
            }
        const double scale = 0.9 * delta / norm_L2h_Theta(eta);
        for (size_t q = 0; q < eta.v.size(); ++q) out.g2.v[q] += scale * eta.v[q];
    }
    return out;
}

}  // namespace pwcip
