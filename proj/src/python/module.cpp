#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "surfdyn/calibration.hpp"
#include "surfdyn/combinatorics.hpp"
#include "surfdyn/dynamics.hpp"
#include "surfdyn/entropy.hpp"
#include "surfdyn/errors.hpp"
#include "surfdyn/lyapunov.hpp"
#include "surfdyn/reports.hpp"

namespace py = pybind11;
using namespace surfdyn;

namespace {

// JSON crosses the boundary as text; the Python package parses it.
std::string run_config(const std::string& text) {
    nlohmann::json config;
    try {
        config = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
    return dump_report(run_experiment(config).report);
}

py::dict lyapunov(const std::string& system, const Params& params, std::pair<double, double> x,
                  std::size_t n) {
    const auto rep = lyapunov_spectrum(builtin_system(system, params), {x.first, x.second}, n);
    py::dict out;
    out["exponents"] = py::make_tuple(rep.exponents[0], rep.exponents[1]);
    out["n_used"] = rep.n_used;
    out["method"] = rep.method;
    out["singular"] = rep.singular;
    out["convergence_trace"] = rep.convergence_trace;
    return out;
}

py::dict entropy(const std::string& system, const Params& params, std::size_t pool_size,
                 std::uint64_t seed, const std::vector<std::size_t>& n_range, double delta, bool grid) {
    const PoolSpec pool{grid ? PoolSpec::Kind::Grid : PoolSpec::Kind::Random, pool_size, seed};
    const auto est = topological_entropy_estimate(builtin_system(system, params), pool, n_range, delta);
    py::dict out;
    out["value"] = est.value;
    out["slope"] = est.slope;
    out["n_range"] = est.n_range;
    out["counts"] = est.counts;
    out["degenerate"] = est.degenerate;
    out["pool_size"] = est.pool_size;
    return out;
}

py::dict bounds(double h_top, double R, double r, int d) {
    const auto b = bounds_from_inputs(h_top, R, r, d);
    py::dict out;
    out["general"] = b.sexent_bound_general;
    out["localdiffeo"] = b.sexent_bound_localdiffeo;
    out["tail"] = b.tail_bound;
    out["buzzi"] = b.buzzi_bound;
    return out;
}

}  // namespace

PYBIND11_MODULE(_surfdyn, m) {
    m.doc() = "Entropy, Lyapunov and reparametrization tools for C^r surface maps";

    auto base = py::register_exception<Error>(m, "SurfdynError", PyExc_RuntimeError);
    py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
    py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<BudgetError>(m, "BudgetError", base.ptr());
    py::register_exception<EscapeError>(m, "EscapeError", base.ptr());

    m.attr("CONFIG_SCHEMA") = kConfigSchema;
    m.attr("REPORT_SCHEMA") = kReportSchema;

    m.def("system_names", &builtin_system_names);
    m.def("lyapunov_spectrum", &lyapunov, py::arg("system"), py::arg("params") = Params{},
          py::arg("x"), py::arg("n") = 200);
    m.def(
        "log_plus_average",
        [](const std::string& system, const Params& params, std::pair<double, double> x, std::size_t n) {
            return log_plus_average(builtin_system(system, params), {x.first, x.second}, n);
        },
        py::arg("system"), py::arg("params") = Params{}, py::arg("x"), py::arg("n"));
    m.def("topological_entropy", &entropy, py::arg("system"), py::arg("params") = Params{},
          py::arg("pool_size") = 20000, py::arg("seed") = 0,
          py::arg("n_range") = std::vector<std::size_t>{1, 2, 3, 4, 5, 6}, py::arg("delta") = 0.2,
          py::arg("grid") = false);

    m.def("bernoulli_entropy", &bernoulli_entropy, py::arg("t"));
    // Counts can exceed 64 bits; Python's int parses the decimal string.
    m.def(
        "count_admitting",
        [](std::size_t n, std::size_t S) {
            return py::reinterpret_steal<py::object>(
                PyLong_FromString(count_admitting(n, S).str().c_str(), nullptr, 10));
        },
        py::arg("n"), py::arg("S"));
    m.def("enumerate_admitting", &enumerate_admitting, py::arg("n"), py::arg("S"));

    m.def("bounds_from_inputs", &bounds, py::arg("h_top"), py::arg("R"), py::arg("r"), py::arg("d") = 2);
    m.def(
        "measure_level_bound",
        [](double chi1, double sum, double r, bool general) {
            return measure_level_bound(chi1, sum, r, general ? BoundMode::General : BoundMode::Diffeo);
        },
        py::arg("chi1_plus"), py::arg("sum_chi_plus"), py::arg("r"), py::arg("general") = false);

    m.def("c_lk", &c_lk, py::arg("s"));
    m.def("c_cover", &c_cover, py::arg("r"));
    m.def("calibration_json", [] { return calibration_to_json(calibration()); });

    m.def(
        "validate_config",
        [](const std::string& text) { validate_config(nlohmann::json::parse(text)); }, py::arg("config_json"));
    m.def("run_config", &run_config, py::arg("config_json"),
          py::call_guard<py::gil_scoped_release>());
}
