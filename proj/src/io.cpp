#include "pwcip/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace pwcip {

namespace {

constexpr char kMagic[6] = {'P', 'W', 'C', 'I', 'P', '1'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw Error("truncated field dump");
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_field_dump(const std::string& path, const SemiDiscreteField& f, double t_max) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out.write(kMagic, sizeof(kMagic));
    put(out, kVersion);
    put(out, static_cast<int32_t>(f.grid.n));
    put(out, static_cast<int32_t>(f.grid.z_samples));
    put(out, static_cast<int32_t>(f.grid.t_samples));
    put(out, f.grid.X);
    put(out, f.grid.h0);
    put(out, f.grid.T1);
    put(out, f.grid.t1);
    put(out, t_max >= 0.0 ? t_max : (f.nt > 1 ? f.grid.T1 : 0.0));
    put(out, static_cast<int32_t>(f.ni));
    put(out, static_cast<int32_t>(f.nj));
    put(out, static_cast<int32_t>(f.nz));
    put(out, static_cast<int32_t>(f.nt));
    out.write(reinterpret_cast<const char*>(f.v.data()),
              static_cast<std::streamsize>(f.v.size() * sizeof(double)));
    if (!out) throw Error("failed writing '" + path + "'");
}

SemiDiscreteField read_field_dump(const std::string& path, double* t_max) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    char magic[6];
    in.read(magic, 6);
    if (!in || std::memcmp(magic, kMagic, 6) != 0)
        throw Error("'" + path + "' is not a field dump (bad magic)");
    if (get<uint32_t>(in) != kVersion) throw Error("unsupported dump version in '" + path + "'");
    GridSpec g;
    g.n = get<int32_t>(in);
    g.z_samples = get<int32_t>(in);
    g.t_samples = get<int32_t>(in);
    g.X = get<double>(in);
    g.h0 = get<double>(in);
    g.T1 = get<double>(in);
    g.t1 = get<double>(in);
    const double tm = get<double>(in);
    if (t_max) *t_max = tm;
    const int ni = get<int32_t>(in), nj = get<int32_t>(in), nz = get<int32_t>(in),
              nt = get<int32_t>(in);
    if (ni != g.n + 2 || nj != g.n + 2 || nz != g.z_samples)
        throw Error("inconsistent dump header in '" + path + "'");
    SemiDiscreteField f(g, nt);
    in.read(reinterpret_cast<char*>(f.v.data()),
            static_cast<std::streamsize>(f.v.size() * sizeof(double)));
    if (!in) throw Error("truncated payload in '" + path + "'");
    return f;
}

void field_to_csv(const std::string& path, const SemiDiscreteField& f, double t_max) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    const double tmax = t_max >= 0.0 ? t_max : f.grid.T1;
    const double dt = f.nt > 1 ? tmax / (f.nt - 1) : 0.0;
    out << "i,j,k,l,x,y,z,t,value\n";
    for (int i = 0; i < f.ni; ++i)
        for (int j = 0; j < f.nj; ++j)
            for (int k = 0; k < f.nz; ++k)
                for (int l = 0; l < f.nt; ++l)
                    out << i << ',' << j << ',' << k << ',' << l << ','
                        << format_double(f.grid.x(i)) << ',' << format_double(f.grid.y(j)) << ','
                        << format_double(f.grid.z(k)) << ',' << format_double(l * dt) << ','
                        << format_double(f.at(i, j, k, l)) << '\n';
}

void gamma_to_csv(const std::string& path, const GammaTrace& g) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "i,j,l,x,y,t,value\n";
    for (int i = 1; i <= g.n; ++i)
        for (int j = 1; j <= g.n; ++j)
            for (int l = 0; l < g.nt; ++l)
                out << i << ',' << j << ',' << l << ',' << format_double(g.grid.x(i)) << ','
                    << format_double(g.grid.y(j)) << ',' << format_double(l * g.dt) << ','
                    << format_double(g.at(i, j, l)) << '\n';
}

void theta_to_csv(const std::string& path, const ThetaTrace& g) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "face,m,k,l,x,y,z,t,value\n";
    for (int face = 0; face < 4; ++face)
        for (int m = 0; m < g.nm; ++m) {
            double x, y;
            g.node_xy(face, m, x, y);
            for (int k = 0; k < g.nz; ++k)
                for (int l = 0; l < g.nt; ++l)
                    out << face << ',' << m << ',' << k << ',' << l << ',' << format_double(x)
                        << ',' << format_double(y) << ',' << format_double(g.grid.z(k)) << ','
                        << format_double(l * g.dt) << ',' << format_double(g.at(face, m, k, l))
                        << '\n';
        }
}

}  // namespace pwcip
