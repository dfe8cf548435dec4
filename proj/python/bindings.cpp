#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "choquard/calibration.hpp"
#include "choquard/cli.hpp"
#include "choquard/io.hpp"

namespace py = pybind11;
using namespace choquard;

namespace {

using ComplexArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;
using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

GridSpec grid_of(const py::buffer_info& info, double L) {
    if (info.ndim < 1 || info.ndim > 3) throw py::value_error("field must have 1 to 3 axes");
    for (py::ssize_t k = 1; k < info.ndim; ++k)
        if (info.shape[k] != info.shape[0]) throw py::value_error("field must have equal samples per axis");
    GridSpec g{static_cast<int>(info.ndim), L, static_cast<int>(info.shape[0])};
    g.check();
    return g;
}

Field to_field(const ComplexArray& a, double L) {
    const py::buffer_info info = a.request();
    const GridSpec g = grid_of(info, L);
    const auto* p = static_cast<const cplx*>(info.ptr);
    return Field(g, std::vector<cplx>(p, p + g.size()));
}

std::vector<py::ssize_t> shape_of(const GridSpec& g) { return std::vector<py::ssize_t>(g.dim, g.M); }

ComplexArray to_array(const Field& u) {
    ComplexArray a(shape_of(u.grid));
    std::copy(u.values.begin(), u.values.end(), a.mutable_data());
    return a;
}

RunConfig parse(const std::string& text) {
    try {
        return parse_config(json::parse(text));
    } catch (const json::parse_error& e) {
        throw py::value_error(e.what());
    } catch (const ConfigError& e) {
        throw py::value_error(e.what());
    }
}

PotentialSpec checked(const RunConfig& rc) {
    const PotentialSpec pot = rc.potential_spec();
    const ValidationReport v = validate_config(rc.problem, pot, rc.grid);
    if (!v.ok()) throw py::value_error(v.violations.front());
    return pot;
}

py::tuple solution(const Solution& sol, json extra) {
    extra["report"] = to_json(sol.report);
    return py::make_tuple(to_array(sol.u), extra.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Ground states of the fractional magnetic Choquard equation on a truncated grid.";
    m.attr("__version__") = tool_version();

    m.def("resolve_config", [](const std::string& text) { return config_text(parse(text)); },
          "Resolved config document with every default filled in.");
    m.def("sha256_hex", [](const py::bytes& b) { return sha256_hex(std::string(b)); });

    m.def("frac_laplacian",
          [](const ComplexArray& u, double L, double s, bool spectral) {
              const Field f = to_field(u, L);
              return to_array(spectral ? spectral_frac_laplacian(f, s) : magnetic_frac_laplacian(f, {}, s));
          },
          py::arg("u"), py::arg("L"), py::arg("s"), py::arg("spectral") = false,
          "Fractional Laplacian of samples on [-L, L)^N, zero-extended quadrature or periodic spectral.");

    m.def("riesz",
          [](const RealArray& h, double L, double mu) {
              const py::buffer_info info = h.request();
              const GridSpec g = grid_of(info, L);
              const HartreeCache cache(g, mu);
              const auto* p = static_cast<const double*>(info.ptr);
              const std::vector<double> out = riesz_convolve(std::span<const double>(p, g.size()), cache);
              RealArray a(shape_of(g));
              std::copy(out.begin(), out.end(), a.mutable_data());
              return a;
          },
          py::arg("h"), py::arg("L"), py::arg("mu"), "Discrete convolution with |x|^-mu.");

    m.def("solve",
          [](const std::string& text) {
              const RunConfig rc = parse(text);
              const PotentialSpec pot = checked(rc);
              Calibration cal;
              Solution sol;
              {
                  py::gil_scoped_release release;
                  Problem p = make_penalized_problem(rc.problem, pot, rc.grid,
                                                     PenalizationParams::from_ell0(rc.problem.q, rc.problem.V0, 1.0),
                                                     rc.quadrature);
                  p = calibrate(p, rc.seed, &cal);
                  sol = solve_penalized(p, rc.solver);
              }
              return solution(sol, {{"calibration", to_json(cal)}});
          },
          py::arg("config"), "Penalized ground state for a JSON config; returns (u, report JSON).");

    m.def("solve_limit",
          [](const std::string& text) {
              const RunConfig rc = parse(text);
              Solution sol;
              {
                  py::gil_scoped_release release;
                  const Problem p = make_limit_problem(rc.problem, rc.grid, rc.limit_quadrature, rc.quadrature);
                  sol = solve_limit(p, rc.solver);
              }
              return solution(sol, json::object());
          },
          py::arg("config"), "Ground state of the constant-potential problem; returns (u, report JSON).");

    m.def("load_field",
          [](const std::string& path) {
              const StoredField f = load_field(path);
              return py::make_tuple(to_array(f.u), read_file(sidecar_path(path)));
          },
          py::arg("path"), "Field samples and sidecar JSON; raises on truncation or checksum mismatch.");

    m.def("save_field",
          [](const std::string& path, const ComplexArray& u, double L, double s, double mu, double eps) {
              const Field f = to_field(u, L);
              ProblemConfig cfg;
              cfg.dim = f.grid.dim;
              cfg.s = s;
              cfg.mu = mu;
              cfg.eps = eps;
              save_field(path, f, field_meta(f, cfg));
          },
          py::arg("path"), py::arg("u"), py::arg("L"), py::arg("s"), py::arg("mu"), py::arg("eps") = 1.0);

    m.def("run_cli",
          [](const std::vector<std::string>& args) {
              std::ostringstream out, err;
              int code = 0;
              {
                  py::gil_scoped_release release;
                  code = cli_main(args, out, err);
              }
              return py::make_tuple(code, out.str(), err.str());
          },
          py::arg("args"), "Runs the command-line tool in process; returns (exit code, stdout, stderr).");

    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
}
