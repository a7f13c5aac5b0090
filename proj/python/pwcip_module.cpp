// Python bindings for the main operations: medium models, ray tracing,
// travel-time/amplitude fields, weighted-estimate evaluation, reconstruction
// drivers and the field dump format.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pwcip/io.hpp"
#include "pwcip/lab.hpp"

namespace py = pybind11;
using namespace pwcip;

namespace {

py::array_t<double> to_numpy(const SemiDiscreteField& f) {
    if (f.is_static()) {
        py::array_t<double> arr({f.ni, f.nj, f.nz});
        std::copy(f.v.begin(), f.v.end(), arr.mutable_data());
        return arr;
    }
    py::array_t<double> arr({f.ni, f.nj, f.nz, f.nt});
    std::copy(f.v.begin(), f.v.end(), arr.mutable_data());
    return arr;
}

py::dict report_to_dict(const InversionRunReport& r) {
    py::dict d;
    d["delta"] = r.delta;
    d["lambda"] = r.lambda;
    d["J"] = r.J;
    d["iterations"] = r.iterations;
    d["err_w"] = r.err_w;
    d["err_tau"] = r.err_tau;
    d["err_n"] = r.err_n;
    d["err_n_medium"] = r.err_n_medium;
    d["seconds"] = r.seconds;
    return d;
}

}  // namespace

PYBIND11_MODULE(_pwcip, m) {
    m.doc() = "plane-wave coefficient-inverse-problem laboratory";

    py::register_exception<Error>(m, "PwcipError");

    py::class_<MediumSpec>(m, "MediumSpec")
        .def_readonly("amplitude", &MediumSpec::amplitude)
        .def_readonly("n0", &MediumSpec::n0)
        .def_readonly("n00", &MediumSpec::n00)
        .def_readonly("X", &MediumSpec::X)
        .def_readonly("monotone_z", &MediumSpec::monotone_z)
        .def_property_readonly("model", &MediumSpec::model_name)
        .def_static("constant", &MediumSpec::constant)
        .def_static("layered", &MediumSpec::layered, py::arg("amplitude"),
                    py::arg("n0") = 1.2, py::arg("n00") = 1.5)
        .def_static("bump", &MediumSpec::bump, py::arg("amplitude"), py::arg("inner") = 0.3,
                    py::arg("outer") = 1.0, py::arg("n0") = 1.2, py::arg("n00") = 1.5,
                    py::arg("X") = 1.125);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init<>())
        .def_readwrite("n", &GridSpec::n)
        .def_readwrite("X", &GridSpec::X)
        .def_readwrite("h0", &GridSpec::h0)
        .def_readwrite("z_samples", &GridSpec::z_samples)
        .def_readwrite("t_samples", &GridSpec::t_samples)
        .def_readwrite("T1", &GridSpec::T1)
        .def_readwrite("t1", &GridSpec::t1)
        .def_property_readonly("h", &GridSpec::h);

    m.def("eval_n", [](const MediumSpec& spec, double x, double y, double z) {
        return eval_n(spec, {x, y, z});
    });
    m.def("eval_grad_n", [](const MediumSpec& spec, double x, double y, double z) {
        const Vec3 g = eval_grad_n(spec, {x, y, z});
        return py::make_tuple(g.x, g.y, g.z);
    });
    m.def("amplitude_floor", &amplitude_floor, py::arg("n0"), py::arg("n00"));

    m.def("validate_medium", [](const MediumSpec& spec, int density) {
        const MediumReport rep = validate_medium(spec, density);
        py::dict d;
        d["passed"] = rep.passed();
        d["diagnostic_mode"] = rep.diagnostic_mode;
        py::list checks;
        for (const auto& c : rep.checks) {
            py::dict cd;
            cd["name"] = c.name;
            cd["pass"] = c.pass;
            cd["waived"] = c.waived;
            cd["worst"] = c.worst;
            checks.append(cd);
        }
        d["checks"] = checks;
        return d;
    }, py::arg("medium"), py::arg("sample_density") = 8);

    m.def("trace_geodesic", [](const MediumSpec& spec, double a, double b, double s_max,
                               double ds) {
        const GeodesicPath p = trace_geodesic(spec, a, b, s_max, ds);
        const py::ssize_t n = static_cast<py::ssize_t>(p.nodes.size());
        py::array_t<double> s(n), x({n, static_cast<py::ssize_t>(3)}),
            mom({n, static_cast<py::ssize_t>(3)});
        for (py::ssize_t q = 0; q < n; ++q) {
            s.mutable_at(q) = p.nodes[q].s;
            for (int c = 0; c < 3; ++c) {
                x.mutable_at(q, c) = p.nodes[q].x[c];
                mom.mutable_at(q, c) = p.nodes[q].p[c];
            }
        }
        py::dict d;
        d["s"] = s;
        d["x"] = x;
        d["p"] = mom;
        d["eikonal_defect"] = p.eikonal_defect;
        return d;
    }, py::arg("medium"), py::arg("a"), py::arg("b"), py::arg("s_max"), py::arg("ds") = 1e-3);

    m.def("travel_time_field", [](const MediumSpec& spec, const GridSpec& grid) {
        const TravelTimeField tt = travel_time_field(spec, grid);
        py::dict d;
        d["tau"] = to_numpy(tt.tau);
        d["dz_tau"] = to_numpy(tt.dz_tau);
        return d;
    });

    m.def("amplitude_field", [](const MediumSpec& spec, const GridSpec& grid) {
        const TravelTimeField tt = travel_time_field(spec, grid);
        const AmplitudeField amp = amplitude_field(spec, grid, tt);
        py::dict d;
        d["A"] = to_numpy(amp.A);
        d["A0"] = amp.A0;
        d["min_A"] = amp.min_A;
        d["max_trace_rate"] = amp.max_trace_rate;
        return d;
    });

    m.def("carleman_weight", [](double z, double t, double lam, double alpha) {
        CarlemanParams p;
        p.lambda = lam;
        p.alpha = alpha;
        return carleman_weight(z, t, p);
    }, py::arg("z"), py::arg("t"), py::arg("lam"), py::arg("alpha"));

    m.def("verify_carleman", [](const std::string& which, const GridSpec& grid,
                                const std::vector<double>& lambdas) {
        CarlemanParams base;
        base.alpha = base.alpha0();
        const auto suite = default_field_suite(grid.X, grid.T1);
        const VerifyReport rep = verify_estimate(
            which == "C6" ? Estimate::C6 : Estimate::C4, suite, lambdas, base, grid);
        py::dict d;
        d["lambda0_found"] = rep.lambda0_found;
        d["lambda0"] = rep.lambda0_emp;
        d["best_C"] = rep.best_C;
        d["min_clean_slope"] = rep.min_clean_slope;
        d["inf_rho_per_lambda"] = rep.inf_rho_per_lambda;
        return d;
    }, py::arg("which"), py::arg("grid"), py::arg("lambdas"));

    m.def("load_config", &load_config);
    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_property_readonly("alpha", &ExperimentConfig::alpha_eff)
        .def_property_readonly("T1", &ExperimentConfig::T1_eff)
        .def_readonly("seed", &ExperimentConfig::seed);

    m.def("run_invert", [](const std::string& config_path, const std::string& out_dir,
                           double delta, uint64_t seed) {
        const ExperimentConfig cfg = load_config(config_path);
        return report_to_dict(run_invert(cfg, out_dir, delta, seed));
    }, py::arg("config_path"), py::arg("out_dir"), py::arg("delta") = 0.0,
       py::arg("seed") = 0);

    m.def("run_sweep", [](const std::string& config_path, const std::string& out_dir) {
        const ExperimentConfig cfg = load_config(config_path);
        const SweepReport rep = run_stability_sweep(cfg, out_dir);
        py::dict d;
        d["slope"] = rep.slope;
        d["C2_max"] = rep.C2_max;
        d["monotone"] = rep.monotone;
        d["below_curve"] = rep.below_curve;
        py::list recs;
        for (const auto& r : rep.records) {
            py::dict rd;
            rd["delta"] = r.delta;
            rd["bound"] = r.bound;
            rd["err_n"] = r.err_n;
            rd["sub_n"] = r.sub_n;
            recs.append(rd);
        }
        d["records"] = recs;
        return d;
    });

    m.def("read_field_dump", [](const std::string& path) {
        double t_max = 0.0;
        const SemiDiscreteField f = read_field_dump(path, &t_max);
        py::dict meta;
        meta["n"] = f.grid.n;
        meta["X"] = f.grid.X;
        meta["z_samples"] = f.grid.z_samples;
        meta["T1"] = f.grid.T1;
        meta["t_max"] = t_max;
        return py::make_tuple(to_numpy(f), meta);
    });
}
