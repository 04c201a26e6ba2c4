#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "bohmrelax/experiment.hpp"
#include "bohmrelax/identities.hpp"

namespace py = pybind11;
using namespace bohmrelax;

namespace {

Point to_point(const std::vector<double>& v) {
    if (v.empty() || v.size() > 2) {
        throw py::value_error("a point has 1 or 2 coordinates");
    }
    return v.size() == 1 ? Point(v[0]) : Point(v[0], v[1]);
}

py::tuple from_point(const Point& p, int dimension) {
    if (dimension == 1) {
        return py::make_tuple(p[0]);
    }
    return py::make_tuple(p[0], p[1]);
}

py::dict diagnostics_dict(const RelaxationDiagnostics& d) {
    py::dict out;
    out["l1"] = d.l1;
    out["hbar"] = d.hbar;
    out["linf"] = d.linf;
    out["hbar_excluded_cells"] = d.hbar_excluded_cells;
    return out;
}

}  // namespace

PYBIND11_MODULE(_bohmrelax, m) {
    m.doc() = "Coarse-grained relaxation to quantum equilibrium for de Broglie-Bohm particle flows";
    m.attr("__version__") = BOHMRELAX_VERSION;

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<NodeProximity>(m, "NodeProximity", base.ptr());
    py::register_exception<StepLimitExceeded>(m, "StepLimitExceeded", base.ptr());
    py::register_exception<CellUnresolvable>(m, "CellUnresolvable", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());

    py::enum_<DomainKind>(m, "DomainKind").value("Box", DomainKind::Box).value("Torus", DomainKind::Torus);

    py::class_<DomainSpec>(m, "DomainSpec")
        .def(py::init([](DomainKind kind, int dimension, std::vector<double> lengths) {
                 std::array<double, 2> l{1.0, 1.0};
                 for (std::size_t i = 0; i < lengths.size() && i < 2; ++i) {
                     l[i] = lengths[i];
                 }
                 return DomainSpec(kind, dimension, l);
             }),
             py::arg("kind"), py::arg("dimension"), py::arg("lengths"))
        .def_static("standard", &DomainSpec::standard, py::arg("kind"), py::arg("dimension"))
        .def_property_readonly("kind", &DomainSpec::kind)
        .def_property_readonly("dimension", &DomainSpec::dimension)
        .def_property_readonly("volume", &DomainSpec::volume)
        .def("__repr__", &DomainSpec::describe);

    py::class_<IntegratorSettings>(m, "IntegratorSettings")
        .def(py::init<>())
        .def_readwrite("rel_tol", &IntegratorSettings::rel_tol)
        .def_readwrite("abs_tol", &IntegratorSettings::abs_tol)
        .def_readwrite("max_step", &IntegratorSettings::max_step)
        .def_readwrite("max_steps", &IntegratorSettings::max_steps)
        .def_readwrite("node_epsilon", &IntegratorSettings::node_epsilon);

    py::class_<WaveSpec>(m, "WaveSpec")
        .def(py::init([](const DomainSpec& domain, const std::vector<std::pair<std::vector<int>, Complex>>& modes) {
                 std::vector<ModeSpec> specs;
                 for (const auto& [n, c] : modes) {
                     if (n.empty() || n.size() > 2) {
                         throw py::value_error("quantum numbers need 1 or 2 entries");
                     }
                     specs.push_back({{n[0], n.size() > 1 ? n[1] : 0}, c});
                 }
                 return WaveSpec(domain, std::move(specs));
             }),
             py::arg("domain"), py::arg("modes"))
        .def_property_readonly("domain", &WaveSpec::domain)
        .def("psi", [](const WaveSpec& w, const std::vector<double>& x, double t) { return w.psi(to_point(x), t); })
        .def("born_density",
             [](const WaveSpec& w, const std::vector<double>& x, double t) { return w.born_density(to_point(x), t); })
        .def("velocity",
             [](const WaveSpec& w, const std::vector<double>& x, double t) {
                 return from_point(w.velocity(to_point(x), t), w.dimension());
             })
        .def("velocity_divergence",
             [](const WaveSpec& w, const std::vector<double>& x, double t) {
                 return w.velocity_divergence(to_point(x), t);
             })
        .def("continuity_residual", [](const WaveSpec& w, const std::vector<double>& x, double t) {
            return w.continuity_residual(to_point(x), t);
        });

    m.def(
        "advect",
        [](const WaveSpec& w, const std::vector<double>& a, double s, double t, const IntegratorSettings& settings) {
            const FlowResult r = advect(w, {to_point(a), s, t}, settings);
            py::dict out;
            out["position"] = from_point(r.position, w.dimension());
            out["jacobian"] = r.jacobian;
            out["steps"] = r.steps;
            return out;
        },
        py::arg("wave"), py::arg("a"), py::arg("s"), py::arg("t"), py::arg("settings") = IntegratorSettings{});

    m.def(
        "jacobian_fd",
        [](const WaveSpec& w, const std::vector<double>& a, double s, double t, double h,
           const IntegratorSettings& settings) { return jacobian_fd(w, {to_point(a), s, t}, h, settings); },
        py::arg("wave"), py::arg("a"), py::arg("s"), py::arg("t"), py::arg("h") = 1e-5,
        py::arg("settings") = IntegratorSettings{});

    m.def(
        "round_trip_defect",
        [](const WaveSpec& w, const std::vector<double>& a, double s, double t, const IntegratorSettings& settings) {
            return round_trip_defect(w, to_point(a), s, t, settings);
        },
        py::arg("wave"), py::arg("a"), py::arg("s"), py::arg("t"), py::arg("settings") = IntegratorSettings{});

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_property_readonly("wave", &ExperimentConfig::wave)
        .def_readonly("times", &ExperimentConfig::times)
        .def_readonly("run_seed", &ExperimentConfig::run_seed)
        .def_readonly("integrator", &ExperimentConfig::integrator)
        .def("to_json", &resolved_config_json);

    m.def("validate_config", &validate_config, py::arg("raw"));
    m.def("load_config", &load_config, py::arg("path"));

    m.def(
        "relaxation_diagnostics",
        [](const std::vector<double>& rho, const std::vector<double>& born, const ExperimentConfig& config) {
            return diagnostics_dict(relaxation_diagnostics(rho, born, config.grid()));
        },
        py::arg("rho_cg"), py::arg("born_cg"), py::arg("config"));

    m.def(
        "run_experiment",
        [](const ExperimentConfig& config, int workers, std::optional<std::filesystem::path> out, bool write) {
            RunOptions options;
            options.workers = workers;
            options.output_dir = std::move(out);
            options.write_files = write;
            RunReport report;
            {
                py::gil_scoped_release release;
                report = run_experiment(config, options);
            }
            py::list snaps;
            for (const auto& s : report.snapshots) {
                py::dict d;
                d["t"] = s.t;
                d["rho_cg"] = s.cells.rho_cg;
                d["born_cg"] = s.cells.born_cg;
                d["jac_back_cg"] = s.cells.jac_back_cg;
                d["excluded"] = s.cells.excluded;
                d["diagnostics"] = diagnostics_dict(s.diagnostics);
                d["hbar_defined"] = s.hbar_defined;
                snaps.append(d);
            }
            py::dict out_dict;
            out_dict["snapshots"] = snaps;
            out_dict["excluded_total"] = report.excluded_total;
            out_dict["files"] = report.files;
            out_dict["wall_seconds"] = report.wall_seconds;
            return out_dict;
        },
        py::arg("config"), py::arg("workers") = 0, py::arg("output_dir") = std::nullopt, py::arg("write") = true);

    m.def(
        "check_identities",
        [](const ExperimentConfig& config, std::int64_t samples, std::uint64_t seed, int workers,
           double velocity_scale) {
            IdentityOptions options;
            options.samples = samples;
            options.seed = seed;
            options.workers = workers;
            options.velocity_scale = velocity_scale;
            IdentityReport report;
            {
                py::gil_scoped_release release;
                report = check_identities(config, options);
            }
            py::dict results;
            for (const auto& r : report.results) {
                py::dict d;
                d["worst"] = r.worst;
                d["tolerance"] = r.tolerance;
                d["evaluated"] = r.evaluated;
                d["failed"] = r.failed;
                d["skipped"] = r.skipped;
                d["passed"] = r.passed;
                results[py::str(r.name)] = d;
            }
            py::dict out;
            out["passed"] = report.passed;
            out["results"] = results;
            return out;
        },
        py::arg("config"), py::arg("samples") = 200, py::arg("seed") = 0, py::arg("workers") = 1,
        py::arg("velocity_scale") = 1.0);
}
