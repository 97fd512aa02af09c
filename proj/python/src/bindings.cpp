#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "evstab/pipeline.hpp"
#include "evstab/state_io.hpp"

namespace py = pybind11;
using namespace evstab;

namespace {

EquationOfState make_eos(const std::string& family, double k, double l, double L0, std::optional<double> E0) {
    EquationOfState e;
    e.family = family_from_string(family);
    e.k = k;
    e.l = l;
    e.L0 = L0;
    e.cutoff_energy = E0;
    e.validate();
    return e;
}

py::dict table_dict(const SteadyState& ss) {
    const auto t = ss.table();
    std::vector<double> cols[8];
    for (const auto& row : t) {
        const double v[8] = {row.r, row.y, row.mu0, row.lambda0, row.rho0, row.p0, row.q0, row.m};
        for (int i = 0; i < 8; ++i) cols[i].push_back(v[i]);
    }
    const char* names[8] = {"r", "y", "mu0", "lambda0", "rho0", "p0", "q0", "m"};
    py::dict d;
    for (int i = 0; i < 8; ++i) d[names[i]] = Eigen::Map<Eigen::VectorXd>(cols[i].data(), Eigen::Index(cols[i].size())).eval();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Linear stability toolkit for static spherically symmetric Einstein-Vlasov states";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<StateFormatError>(m, "StateFormatError", PyExc_ValueError);

    m.def("phi", [](const std::string& family, double k, double l, double L0, double E0, double E, double L) {
        return phi(make_eos(family, k, l, L0, E0), E, L);
    }, py::arg("family"), py::arg("k"), py::arg("l"), py::arg("L0"), py::arg("E0"), py::arg("E"), py::arg("L"));
    m.def("phi_prime", [](const std::string& family, double k, double l, double L0, double E0, double E, double L) {
        return phi_prime(make_eos(family, k, l, L0, E0), E, L);
    }, py::arg("family"), py::arg("k"), py::arg("l"), py::arg("L0"), py::arg("E0"), py::arg("E"), py::arg("L"));
    m.def("profile_GH", [](const std::string& family, double k, double l, double L0, double r, double y) {
        const auto gh = profile_GH(make_eos(family, k, l, L0, std::nullopt), r, y);
        return py::make_tuple(gh.G, gh.H);
    }, py::arg("family"), py::arg("k"), py::arg("l"), py::arg("L0"), py::arg("r"), py::arg("y"));

    m.def("critical_radii", [](double M, double L) {
        const auto c = schwarzschild_critical_radii(M, L);
        return py::make_tuple(c.s_L, c.r_L);
    }, py::arg("M"), py::arg("L"));
    m.def("level_radii", [](double M, double L, double E) {
        const auto c = schwarzschild_level_radii(M, L, E);
        return py::make_tuple(c.r0, c.r_minus, c.r_plus);
    }, py::arg("M"), py::arg("L"), py::arg("E"));

    py::class_<RunConfig>(m, "RunConfig")
        .def_static("parse", &parse_config_text, py::arg("text"), py::arg("mode_required") = true)
        .def_static("load", [](const std::string& p) { return parse_config(p); }, py::arg("path"))
        .def("to_json", [](const RunConfig& c) { return to_json(c).dump(); });

    py::class_<SteadyState>(m, "SteadyState")
        .def_property_readonly("mode", [](const SteadyState& s) { return to_string(s.mode); })
        .def_property_readonly("E0", &SteadyState::E0)
        .def_readonly("M", &SteadyState::M)
        .def_readonly("Rmin", &SteadyState::Rmin)
        .def_readonly("Rmax", &SteadyState::Rmax)
        .def_readonly("M_vlasov", &SteadyState::M_vlasov)
        .def_readonly("vacuum", &SteadyState::vacuum)
        .def("rho", &SteadyState::rho, py::arg("r"))
        .def("p", &SteadyState::p, py::arg("r"))
        .def("mu", &SteadyState::mu, py::arg("r"))
        .def("lambda_", &SteadyState::lambda, py::arg("r"))
        .def("psi", &SteadyState::psi, py::arg("L"), py::arg("r"))
        .def("table", &table_dict)
        .def("summary", [](const SteadyState& s) { return state_summary(s).dump(); })
        .def("to_string", &state_to_string)
        .def_static("from_string", &state_from_string, py::arg("text"))
        .def("save", [](const SteadyState& s, const std::string& p) { save_state(s, p); }, py::arg("path"))
        .def_static("load", [](const std::string& p) { return load_state(p); }, py::arg("path"));

    m.def("build_state", &build_state, py::arg("config"), py::call_guard<py::gil_scoped_release>());

    m.def("check_single_well", [](const SteadyState& s, std::size_t n_L, std::size_t samples) {
        return to_json(verify_single_well(s, n_L, samples)).dump();
    }, py::arg("state"), py::arg("n_L") = 64, py::arg("samples") = 2048, py::call_guard<py::gil_scoped_release>());

    m.def("period", [](const SteadyState& s, double E, double L) { return period(s, E, L).T; },
          py::arg("state"), py::arg("E"), py::arg("L"));

    m.def("sample_orbits", [](const SteadyState& s, std::size_t n) {
        std::vector<std::tuple<double, double, double, double, double>> out;
        for (const auto& o : sample_orbits(s, n)) out.emplace_back(o.E, o.L, o.r_minus, o.r_plus, o.T);
        return out;
    }, py::arg("state"), py::arg("n") = 100);

    m.def("kernel", [](const SteadyState& s, const RunConfig& c) {
        py::gil_scoped_release nogil;
        const auto k = kernel_K(s, c.kernel);
        py::gil_scoped_acquire gil;
        py::dict d;
        d["r"] = k.r;
        d["w"] = k.w;
        d["K"] = k.K;
        d["eigenvalues"] = k.eigenvalues;
        d["hs_norm"] = k.hs_norm;
        return d;
    }, py::arg("state"), py::arg("config"));

    m.def("classify_spectrum", [](const std::vector<double>& lambdas, double tol) {
        return to_json(classify(synthetic_separable_kernel(lambdas), tol)).dump();
    }, py::arg("lambdas"), py::arg("tol") = 1e-3);

    m.def("run_pipeline", [](const RunConfig& c) {
        py::gil_scoped_release nogil;
        const auto rep = run_pipeline(c);
        return to_json(rep).dump();
    }, py::arg("config"));
    m.def("run_pipeline_from_state", [](const RunConfig& c, const SteadyState& s) {
        py::gil_scoped_release nogil;
        const auto rep = run_pipeline(c, s);
        return to_json(rep).dump();
    }, py::arg("config"), py::arg("state"));
}
