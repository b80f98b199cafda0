#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "singular_sense/cli.hpp"
#include "singular_sense/errors.hpp"
#include "singular_sense/scenarios.hpp"

namespace py = pybind11;
using namespace singular_sense;

namespace {

std::vector<Mat4> phase_space_list(const std::vector<std::string>& names) {
    std::vector<Mat4> out;
    for (const auto& n : names) out.push_back(phase_space_rep(perturbation(n).matrix));
    return out;
}

py::dict fisher_dict(const FisherMatrix& f) {
    py::dict d;
    d["entries"] = f.entries;
    d["kind"] = std::string(to_string(f.kind));
    return d;
}

FisherMatrix fisher_from(const Mat& entries) {
    FisherMatrix f;
    f.entries = entries;
    return f;
}

// Fisher matrices at theta0 for primary (and optional nuisance) perturbations, direct output state.
py::dict point_information(const SensorParams& p, const InputSpec& in, const std::vector<std::string>& names,
                           const std::vector<double>& thetas, bool exact_sld) {
    std::vector<PerturbationSpec> specs;
    for (const auto& n : names) specs.push_back(perturbation(n));
    const Mat4 g = direct_response(perturbed_generator(p, specs, thetas));
    std::vector<Mat4> dg;
    for (const Mat4& n : phase_space_list(names)) dg.push_back(response_derivative(g, n));
    const GaussianState st = output_state(g, p, in);
    const OutputDerivatives d = output_derivatives(g, dg, p, in);
    const FisherMatrix c = cfim_heterodyne(st, d.dmean, d.dcov);
    const FisherMatrix q = exact_sld ? qfim_exact(st, d.dmean, d.dcov) : qfim_noisy(st, d.dmean, d.dcov);
    py::dict out;
    out["mean"] = st.mean;
    out["cov"] = st.cov;
    out["classical"] = c.entries;
    out["quantum"] = q.entries;
    const Bounds b = bounds(c, q, 0);
    out["delta_c"] = b.delta_c;
    out["delta_q"] = b.delta_q;
    out["Delta_c"] = b.Delta_c;
    out["Delta_q"] = b.Delta_q;
    return out;
}

py::dict sweep_dict(const SweepResult& r) {
    std::vector<double> theta, dc, dq, nc, nq;
    std::vector<bool> stable, singular;
    for (const auto& row : r.rows) {
        theta.push_back(row.theta0);
        dc.push_back(row.bounds.delta_c);
        dq.push_back(row.bounds.delta_q);
        nc.push_back(row.bounds.Delta_c);
        nq.push_back(row.bounds.Delta_q);
        stable.push_back(row.stable);
        singular.push_back(row.singular);
    }
    py::dict d;
    d["theta0"] = theta;
    d["delta_c"] = dc;
    d["delta_q"] = dq;
    d["Delta_c"] = nc;
    d["Delta_q"] = nq;
    d["stable"] = stable;
    d["singular"] = singular;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Response-function expansions and Fisher-information bounds for two-mode non-Hermitian sensors";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<PhysicalityError>(m, "PhysicalityError", base.ptr());
    py::register_exception<SingularMatrixError>(m, "SingularMatrixError", base.ptr());
    py::register_exception<NotInvertibleFamilyError>(m, "NotInvertibleFamilyError", base.ptr());
    py::register_exception<PoleAtZeroError>(m, "PoleAtZeroError", base.ptr());
    py::register_exception<NearPureStateError>(m, "NearPureStateError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    // linear algebra
    m.def("phase_space_rep", py::overload_cast<const CMat&>(&phase_space_rep), py::arg("m"));
    m.def("symplectic_form", &symplectic_form, py::arg("n_modes"));
    m.def("numerical_rank", &numerical_rank, py::arg("a"), py::arg("rel_tol") = 1e-10);
    m.def("pseudo_inverse", &pseudo_inverse, py::arg("a"), py::arg("rel_tol") = 1e-10);
    m.def(
        "williamson",
        [](const Mat& v) {
            const auto w = williamson(v);
            return py::make_tuple(w.transform, w.symplectic_eigenvalues);
        },
        py::arg("v"), "Returns (D, symplectic eigenvalues) with V = D diag(v, v) D^T.");

    // sensor model
    py::class_<SensorParams>(m, "SensorParams")
        .def(py::init([](double g, double gamma1, double gamma2, double kappa, double omega0, double omega) {
                 return SensorParams{g, gamma1, gamma2, kappa, omega0, omega};
             }),
             py::arg("g") = 1.0, py::arg("gamma1") = 1.0, py::arg("gamma2") = 1.0, py::arg("kappa") = 1.0,
             py::arg("omega0") = 0.0, py::arg("omega") = 0.0)
        .def_readwrite("g", &SensorParams::g)
        .def_readwrite("gamma1", &SensorParams::gamma1)
        .def_readwrite("gamma2", &SensorParams::gamma2)
        .def_readwrite("kappa", &SensorParams::kappa)
        .def_readwrite("omega0", &SensorParams::omega0)
        .def_readwrite("omega", &SensorParams::omega)
        .def_property_readonly("eta1", &SensorParams::eta1)
        .def_property_readonly("eta2", &SensorParams::eta2)
        .def("__repr__", [](const SensorParams& p) {
            std::ostringstream os;
            os << "SensorParams(g=" << p.g << ", gamma1=" << p.gamma1 << ", gamma2=" << p.gamma2
               << ", kappa=" << p.kappa << ", omega0=" << p.omega0 << ", omega=" << p.omega << ")";
            return os.str();
        });
    m.def("params_from_rates", &params_from_rates, py::arg("g"), py::arg("eta1"), py::arg("eta2"), py::arg("kappa"),
          py::arg("omega0") = 0.0, py::arg("omega") = 0.0);
    m.def("build_generator", [](const SensorParams& p) { return CMat(build_generator(p)); }, py::arg("params"));
    m.def(
        "classify",
        [](const SensorParams& p, double tol) {
            const RegimeReport r = classify(p, tol);
            py::dict d;
            d["singular"] = r.is_singular;
            d["pt_symmetric"] = r.is_pt_symmetric;
            d["ep"] = r.is_ep;
            d["balanced"] = r.is_balanced;
            d["stable"] = r.is_stable;
            d["at_lasing_threshold"] = r.at_lasing_threshold;
            d["det_h"] = r.det_h;
            d["det_m"] = r.det_m;
            d["eigenvalues"] = py::make_tuple(r.eigen.lambda_plus, r.eigen.lambda_minus);
            return d;
        },
        py::arg("params"), py::arg("tol") = 1e-9);
    m.def("lasing_threshold", &lasing_threshold, py::arg("params"));
    m.def(
        "steady_state_occupations",
        [](const SensorParams& p) {
            const SteadyState s = steady_state_occupations(p);
            const char* status = s.status == SteadyStateStatus::Stable     ? "stable"
                                 : s.status == SteadyStateStatus::Unstable ? "unstable"
                                                                           : "at_threshold";
            return py::make_tuple(std::string(status), s.n1, s.n2);
        },
        py::arg("params"), "Returns (status, n1, n2).");
    m.def("singular_detunings", &singular_detunings, py::arg("params"), py::arg("tol") = 1e-9);
    m.def("perturbation", [](const std::string& name) { return CMat(perturbation(name).matrix); }, py::arg("name"));
    m.def("perturbation_names", &perturbation_names);
    m.def(
        "perturbed_generator",
        [](const SensorParams& p, const std::vector<std::string>& names, const std::vector<double>& thetas) {
            std::vector<PerturbationSpec> specs;
            for (const auto& n : names) specs.push_back(perturbation(n));
            return Mat(perturbed_generator(p, specs, thetas));
        },
        py::arg("params"), py::arg("names"), py::arg("thetas"));

    // expansions
    py::class_<LaurentExpansion>(m, "LaurentExpansion")
        .def_readonly("pole_order", &LaurentExpansion::pole_order)
        .def_readonly("coeffs", &LaurentExpansion::coeffs)
        .def_readonly("includes_symplectic_prefactor", &LaurentExpansion::includes_symplectic_prefactor)
        .def("__call__", [](const LaurentExpansion& e, double theta) { return evaluate(e, theta); },
             py::arg("theta"));
    m.def("pole_order", [](const std::vector<Mat>& coeffs, double rel_tol) {
        return pole_order(MatrixFamily{coeffs}, rel_tol);
    }, py::arg("coeffs"), py::arg("rel_tol") = 1e-10);
    m.def("sm_expansion", [](const std::vector<Mat>& coeffs, int r_max, double rel_tol) {
        return sm_expansion(MatrixFamily{coeffs}, r_max, rel_tol);
    }, py::arg("coeffs"), py::arg("r_max") = 6, py::arg("rel_tol") = 1e-10);
    m.def("neumann_expansion", &neumann_expansion, py::arg("h"), py::arg("n0"), py::arg("order") = 20);
    m.def("direct_response", &direct_response, py::arg("m"));

    // channel
    py::class_<InputSpec>(m, "InputSpec")
        .def(py::init([](double n_A, double n_B, const Vec4& displacement) {
                 InputSpec in;
                 in.n_A = n_A;
                 in.n_B = n_B;
                 in.displacement = displacement;
                 return in;
             }),
             py::arg("n_A") = 1.0, py::arg("n_B") = 1.0, py::arg("displacement") = Vec4::Zero())
        .def_readwrite("n_A", &InputSpec::n_A)
        .def_readwrite("n_B", &InputSpec::n_B)
        .def_readwrite("displacement", &InputSpec::displacement);
    m.def(
        "output_state",
        [](const Mat4& g, const SensorParams& p, const InputSpec& in) {
            const GaussianState s = output_state(g, p, in);
            return py::make_tuple(s.mean, s.cov);
        },
        py::arg("g"), py::arg("params"), py::arg("inputs"), "Returns (mean, cov) of the output probe.");
    m.def("is_physical", &is_physical, py::arg("cov"), py::arg("tol") = 1e-9);

    // Fisher information
    m.def("cfim_gaussian", [](const Mat& cov, const std::vector<Vec>& dm, const std::vector<Mat>& dc) {
        return fisher_dict(cfim_gaussian(cov, dm, dc));
    }, py::arg("cov"), py::arg("dmean"), py::arg("dcov"));
    m.def("qfim_noisy", [](const Vec& mean, const Mat& cov, const std::vector<Vec>& dm, const std::vector<Mat>& dc) {
        return fisher_dict(qfim_noisy({mean, cov}, dm, dc));
    }, py::arg("mean"), py::arg("cov"), py::arg("dmean"), py::arg("dcov"));
    m.def("qfim_exact", [](const Vec& mean, const Mat& cov, const std::vector<Vec>& dm, const std::vector<Mat>& dc) {
        return fisher_dict(qfim_exact({mean, cov}, dm, dc));
    }, py::arg("mean"), py::arg("cov"), py::arg("dmean"), py::arg("dcov"));
    m.def("sld_matrix", &sld_matrix, py::arg("v"), py::arg("dv"), py::arg("pure_guard") = 1e-6);
    m.def("sld_residual", &sld_residual, py::arg("v"), py::arg("dv"), py::arg("l"));
    m.def(
        "error_bounds",
        [](const Mat& f, int i) {
            const ErrorBounds b = error_bounds(fisher_from(f), i);
            return py::make_tuple(b.delta, b.Delta);
        },
        py::arg("fisher"), py::arg("index") = 0, "Returns (delta, Delta) for parameter index.");
    m.def("cfim_monte_carlo",
          [](const Vec& mean, const Mat& cov, const std::vector<Vec>& dm, const std::vector<Mat>& dc,
             std::int64_t n, std::uint64_t seed) { return fisher_dict(cfim_monte_carlo({mean, cov}, dm, dc, n, seed)); },
          py::arg("mean"), py::arg("cov"), py::arg("dmean"), py::arg("dcov"), py::arg("n_samples"),
          py::arg("seed"));
    m.def("point_information", &point_information, py::arg("params"), py::arg("inputs"), py::arg("names"),
          py::arg("thetas"), py::arg("exact_sld") = false,
          "Output state, heterodyne and quantum Fisher matrices and bounds for the first parameter.");

    // scenarios
    m.def(
        "s_coefficients",
        [](double theta1, const InputSpec& in, const SensorParams& p) {
            const SCoefficients s = s_coefficients(theta1, in, p);
            return py::make_tuple(s.alpha, s.beta, s.gamma);
        },
        py::arg("theta1"), py::arg("inputs"), py::arg("params"));
    m.def(
        "theta1zero_coeffs",
        [](const InputSpec& in, const SensorParams& p) {
            const Theta1ZeroCoefficients z = theta1zero_coeffs(in, p);
            py::dict d;
            d["alpha00"] = z.alpha00;
            d["beta00"] = z.beta00;
            d["alpha01"] = z.alpha01;
            d["alpha11"] = z.alpha11;
            d["beta11"] = z.beta11;
            return d;
        },
        py::arg("inputs"), py::arg("params"));
    m.def("ns_thermal_f00", &ns_thermal_f00, py::arg("theta1"), py::arg("inputs"), py::arg("params"));
    m.def(
        "sweep",
        [](const SensorParams& p, const InputSpec& in, const std::string& primary, const std::string& nuisance,
           double theta1, double sign, double grid_min, double grid_max, int grid_points, bool exact_sld) {
            SweepSpec s;
            s.params = p;
            s.inputs = in;
            s.primary = primary;
            s.nuisance = nuisance;
            s.theta1 = theta1;
            s.sign = sign;
            s.grid_min = grid_min;
            s.grid_max = grid_max;
            s.grid_points = grid_points;
            s.exact_sld = exact_sld;
            return sweep_dict(sweep_error(s));
        },
        py::arg("params"), py::arg("inputs"), py::arg("primary") = "two_mode_symmetric", py::arg("nuisance") = "",
        py::arg("theta1") = 0.0, py::arg("sign") = 1.0, py::arg("grid_min") = 1e-4, py::arg("grid_max") = 1.0,
        py::arg("grid_points") = 60, py::arg("exact_sld") = false);
    m.def(
        "fit_slope",
        [](const std::vector<double>& theta, const std::vector<double>& err, double lo, double hi) {
            const SlopeFit f = fit_slope(theta, err, lo, hi);
            return py::make_tuple(f.slope, f.prefactor);
        },
        py::arg("theta"), py::arg("err"), py::arg("lo"), py::arg("hi"), "Returns (slope, prefactor).");
    m.def(
        "reproduce_figure",
        [](const std::string& figure, const std::string& out_dir) {
            const FigureVerdict v = reproduce_figure(figure, out_dir);
            py::list curves;
            for (const auto& c : v.curves) {
                py::dict d;
                d["name"] = c.name;
                d["slope"] = c.slope;
                d["prefactor"] = c.prefactor;
                d["expected_slope"] = c.expected_slope;
                d["pass"] = c.pass;
                d["csv_path"] = c.csv_path;
                curves.append(d);
            }
            py::dict out;
            out["figure"] = v.figure;
            out["pass"] = v.pass();
            out["curves"] = curves;
            return out;
        },
        py::arg("figure"), py::arg("out_dir") = "");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line front end; returns (exit_code, stdout, stderr).");
}
