#include "singular_sense/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "singular_sense/errors.hpp"
#include "singular_sense/expansion.hpp"
#include "singular_sense/scenarios.hpp"

namespace singular_sense {

namespace {

nlohmann::json matrix_json(const Mat& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json complex_json(std::complex<double> z) {
    return nlohmann::json::array({z.real(), z.imag()});
}

const char* status_name(SteadyStateStatus s) {
    switch (s) {
        case SteadyStateStatus::Stable: return "stable";
        case SteadyStateStatus::Unstable: return "unstable";
        case SteadyStateStatus::AtThreshold: return "at_threshold";
    }
    return "unknown";
}

std::vector<PerturbationSpec> specs_of(const RunConfig& cfg, std::vector<double>* thetas, double theta0) {
    std::vector<PerturbationSpec> specs{perturbation(cfg.perturbation)};
    thetas->assign({cfg.sign * theta0});
    if (!cfg.nuisance.empty()) {
        specs.push_back(perturbation(cfg.nuisance));
        thetas->push_back(cfg.theta1);
    }
    return specs;
}

SweepSpec sweep_spec(const RunConfig& cfg) {
    SweepSpec s;
    s.params = cfg.params;
    s.inputs = cfg.inputs;
    s.primary = cfg.perturbation;
    s.nuisance = cfg.nuisance;
    s.theta1 = cfg.theta1;
    s.sign = cfg.sign;
    s.grid_min = cfg.theta_min;
    s.grid_max = cfg.theta_max;
    s.grid_points = cfg.theta_points;
    s.exact_sld = cfg.exact_sld;
    s.fisher.mean_prefactor = cfg.mean_prefactor;
    return s;
}

struct PointFisher {
    GaussianState state;
    OutputDerivatives derivs;
    FisherMatrix classical;
    FisherMatrix quantum;
};

PointFisher point_fisher(const RunConfig& cfg) {
    std::vector<double> thetas;
    const auto specs = specs_of(cfg, &thetas, cfg.theta0);
    const Mat4 m = perturbed_generator(cfg.params, specs, thetas);
    const Mat4 g = direct_response(m);
    std::vector<Mat4> dg;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        Mat4 n = phase_space_rep(specs[i].matrix);
        if (i == 0) n *= cfg.sign;
        dg.push_back(response_derivative(g, n));
    }
    PointFisher pf;
    pf.state = output_state(g, cfg.params, cfg.inputs);
    pf.derivs = output_derivatives(g, dg, cfg.params, cfg.inputs);
    pf.classical = cfim_heterodyne(pf.state, pf.derivs.dmean, pf.derivs.dcov);
    FisherOptions fo;
    fo.mean_prefactor = cfg.mean_prefactor;
    pf.quantum = cfg.exact_sld ? qfim_exact(pf.state, pf.derivs.dmean, pf.derivs.dcov, fo)
                               : qfim_noisy(pf.state, pf.derivs.dmean, pf.derivs.dcov, fo);
    return pf;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f << body;
    if (!f) throw IoError("failed writing " + path.string());
}

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace

void apply_config_json(RunConfig& cfg, const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::vector<std::string> known = {
        "g", "gamma1", "gamma2", "kappa", "omega0", "omega", "n_A", "n_B", "displacement", "perturbation",
        "nuisance", "theta0", "theta1", "sign", "theta_min", "theta_max", "theta_points", "tol", "rank_tol",
        "r_max", "neumann_order", "seed", "samples", "out_dir", "mean_prefactor", "exact_sld"};
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown config key: " + key);
    }
    try {
        read_key(j, "g", cfg.params.g);
        read_key(j, "gamma1", cfg.params.gamma1);
        read_key(j, "gamma2", cfg.params.gamma2);
        read_key(j, "kappa", cfg.params.kappa);
        read_key(j, "omega0", cfg.params.omega0);
        read_key(j, "omega", cfg.params.omega);
        read_key(j, "n_A", cfg.inputs.n_A);
        read_key(j, "n_B", cfg.inputs.n_B);
        if (j.contains("displacement")) {
            const auto d = j.at("displacement").get<std::vector<double>>();
            if (d.size() != 4) throw ConfigError("displacement needs 4 entries (q1, q2, p1, p2)");
            cfg.inputs.displacement = Vec4(d[0], d[1], d[2], d[3]);
        }
        read_key(j, "perturbation", cfg.perturbation);
        read_key(j, "nuisance", cfg.nuisance);
        read_key(j, "theta0", cfg.theta0);
        read_key(j, "theta1", cfg.theta1);
        read_key(j, "sign", cfg.sign);
        read_key(j, "theta_min", cfg.theta_min);
        read_key(j, "theta_max", cfg.theta_max);
        read_key(j, "theta_points", cfg.theta_points);
        read_key(j, "tol", cfg.tol);
        read_key(j, "rank_tol", cfg.rank_tol);
        read_key(j, "r_max", cfg.r_max);
        read_key(j, "neumann_order", cfg.neumann_order);
        read_key(j, "seed", cfg.seed);
        read_key(j, "samples", cfg.samples);
        read_key(j, "out_dir", cfg.out_dir);
        read_key(j, "mean_prefactor", cfg.mean_prefactor);
        read_key(j, "exact_sld", cfg.exact_sld);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
}

nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["g"] = cfg.params.g;
    j["gamma1"] = cfg.params.gamma1;
    j["gamma2"] = cfg.params.gamma2;
    j["kappa"] = cfg.params.kappa;
    j["omega0"] = cfg.params.omega0;
    j["omega"] = cfg.params.omega;
    j["n_A"] = cfg.inputs.n_A;
    j["n_B"] = cfg.inputs.n_B;
    const Vec4& d = cfg.inputs.displacement;
    j["displacement"] = {d(0), d(1), d(2), d(3)};
    j["perturbation"] = cfg.perturbation;
    j["nuisance"] = cfg.nuisance;
    j["theta0"] = cfg.theta0;
    j["theta1"] = cfg.theta1;
    j["sign"] = cfg.sign;
    j["theta_min"] = cfg.theta_min;
    j["theta_max"] = cfg.theta_max;
    j["theta_points"] = cfg.theta_points;
    j["tol"] = cfg.tol;
    j["rank_tol"] = cfg.rank_tol;
    j["r_max"] = cfg.r_max;
    j["neumann_order"] = cfg.neumann_order;
    j["seed"] = cfg.seed;
    j["samples"] = cfg.samples;
    j["out_dir"] = cfg.out_dir;
    j["mean_prefactor"] = cfg.mean_prefactor;
    j["exact_sld"] = cfg.exact_sld;
    return nlohmann::json(j);
}

void validate(const RunConfig& cfg) {
    const SensorParams& p = cfg.params;
    if (!(p.kappa > 0.0)) throw ConfigError("kappa must be positive");
    try {
        check_physical(p);
    } catch (const PhysicalityError& e) {
        throw ConfigError(e.what());
    }
    if (!(cfg.inputs.n_A >= 0.0) || !(cfg.inputs.n_B >= 0.0)) throw ConfigError("n_A and n_B must be non-negative");
    try {
        perturbation(cfg.perturbation);
        if (!cfg.nuisance.empty()) perturbation(cfg.nuisance);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(cfg.theta_min > 0.0) || !(cfg.theta_max > cfg.theta_min) || cfg.theta_points < 2)
        throw ConfigError("theta grid needs 0 < theta_min < theta_max and at least 2 points");
    if (cfg.sign != 1.0 && cfg.sign != -1.0) throw ConfigError("sign must be +1 or -1");
    if (!(cfg.tol > 0.0) || !(cfg.rank_tol > 0.0)) throw ConfigError("tolerances must be positive");
    if (cfg.r_max < 0 || cfg.neumann_order < 0) throw ConfigError("expansion orders must be non-negative");
    if (cfg.samples < 100) throw ConfigError("samples must be at least 100");
    if (!(cfg.mean_prefactor >= 0.0)) throw ConfigError("mean_prefactor must be non-negative");
}

std::string default_out_dir() {
    const char* env = std::getenv("SINGULAR_SENSE_OUT");
    return env && *env ? std::string(env) : std::string("singular_sense_out");
}

nlohmann::json cmd_classify(const RunConfig& cfg) {
    const RegimeReport r = classify(cfg.params, cfg.tol);
    const SteadyState ss = steady_state_occupations(cfg.params);
    nlohmann::ordered_json j;
    j["singular"] = r.is_singular;
    j["pt_symmetric"] = r.is_pt_symmetric;
    j["ep"] = r.is_ep;
    j["balanced"] = r.is_balanced;
    j["stable"] = r.is_stable;
    j["at_lasing_threshold"] = r.at_lasing_threshold;
    j["det_h"] = r.det_h;
    j["det_m"] = r.det_m;
    j["det_m_zero"] = std::abs(r.det_m) < cfg.tol;
    j["eigenvalues"] = {complex_json(r.eigen.lambda_plus), complex_json(r.eigen.lambda_minus)};
    j["lasing_threshold"] = lasing_threshold(cfg.params);
    j["singular_detunings"] = singular_detunings(cfg.params, cfg.tol);
    j["steady_state"] = {{"status", status_name(ss.status)}, {"n1", ss.n1}, {"n2", ss.n2}};
    return nlohmann::json(j);
}

nlohmann::json cmd_steady_state(const RunConfig& cfg) {
    check_physical(cfg.params);
    const SteadyState ss = steady_state_occupations(cfg.params);
    nlohmann::ordered_json j;
    j["status"] = status_name(ss.status);
    j["n1"] = ss.n1;
    j["n2"] = ss.n2;
    j["lasing_threshold"] = lasing_threshold(cfg.params);
    return nlohmann::json(j);
}

nlohmann::json cmd_expand(const RunConfig& cfg, double check_theta) {
    std::vector<double> op_thetas{0.0};
    std::vector<PerturbationSpec> specs{perturbation(cfg.perturbation)};
    if (!cfg.nuisance.empty()) {
        specs.push_back(perturbation(cfg.nuisance));
        op_thetas.push_back(cfg.theta1);
    }
    const Mat4 a0 = perturbed_generator(cfg.params, specs, op_thetas);
    const Mat4 n0 = cfg.sign * phase_space_rep(specs[0].matrix);
    nlohmann::ordered_json j;
    LaurentExpansion e;
    if (numerical_rank(a0, cfg.rank_tol) == 4) {
        e = neumann_expansion(-a0, n0, cfg.neumann_order);
        j["path"] = "neumann";
        j["note"] = "operating point is regular (s = 0); response has a Neumann series";
    } else {
        MatrixFamily fam;
        fam.coeffs = {a0, n0};
        e = sm_expansion(fam, cfg.r_max, cfg.rank_tol);
        j["path"] = "sm";
    }
    j["pole_order"] = e.pole_order;
    j["includes_symplectic_prefactor"] = e.includes_symplectic_prefactor;
    nlohmann::json coeffs = nlohmann::json::array();
    const std::size_t shown = e.pole_order == 0 ? std::min<std::size_t>(e.coeffs.size(), 3) : e.coeffs.size();
    for (std::size_t k = 0; k < shown; ++k) coeffs.push_back(matrix_json(e.coeffs[k]));
    j["coeffs"] = coeffs;
    if (check_theta > 0.0) {
        const Mat4 m = a0 + check_theta * n0;
        const Mat direct = direct_response(m);
        j["check_theta0"] = check_theta;
        j["check_residual"] = (evaluate(e, check_theta) - direct).norm() / direct.norm();
    }
    return nlohmann::json(j);
}

nlohmann::json cmd_bounds(const RunConfig& cfg) {
    const PointFisher pf = point_fisher(cfg);
    const Bounds b = bounds(pf.classical, pf.quantum, 0);
    nlohmann::ordered_json j;
    j["theta0"] = cfg.theta0;
    j["classical_fisher"] = matrix_json(pf.classical.entries);
    j["quantum_fisher"] = matrix_json(pf.quantum.entries);
    j["quantum_kind"] = to_string(pf.quantum.kind);
    j["delta_c"] = b.delta_c;
    j["delta_q"] = b.delta_q;
    j["Delta_c"] = b.Delta_c;
    j["Delta_q"] = b.Delta_q;
    return nlohmann::json(j);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sensing near singular points of non-Hermitian two-mode sensors"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flat keys)");
    std::optional<double> g, gamma1, gamma2, kappa, omega0, omega, n_a, n_b, theta0, theta1, sign, tmin, tmax, mp;
    std::optional<int> tpoints;
    std::optional<std::string> pert, nuis, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> samples;
    bool exact_sld = false;
    app.add_option("--g", g);
    app.add_option("--gamma1", gamma1);
    app.add_option("--gamma2", gamma2);
    app.add_option("--kappa", kappa);
    app.add_option("--omega0", omega0);
    app.add_option("--omega", omega);
    app.add_option("--n-A", n_a);
    app.add_option("--n-B", n_b);
    app.add_option("--theta0", theta0);
    app.add_option("--theta1", theta1);
    app.add_option("--sign", sign);
    app.add_option("--theta-min", tmin);
    app.add_option("--theta-max", tmax);
    app.add_option("--theta-points", tpoints);
    app.add_option("--mean-prefactor", mp);
    app.add_option("--perturbation", pert);
    app.add_option("--nuisance", nuis);
    app.add_option("--out", out_dir, "output directory (default $SINGULAR_SENSE_OUT)");
    app.add_option("--seed", seed);
    app.add_option("--samples", samples);
    app.add_flag("--exact-sld", exact_sld, "use the exact SLD quantum Fisher information");

    auto* classify_cmd = app.add_subcommand("classify", "regime report as JSON");
    auto* steady_cmd = app.add_subcommand("steady-state", "steady-state photon numbers");
    auto* expand_cmd = app.add_subcommand("expand", "pole order and expansion coefficients");
    double check_theta = 0.0;
    expand_cmd->add_option("--check", check_theta, "compare against the direct inverse at this theta0");
    auto* bounds_cmd = app.add_subcommand("bounds", "Fisher matrices and error bounds at theta0");
    auto* sweep_cmd = app.add_subcommand("sweep", "theta0 sweep written as CSV");
    auto* figure_cmd = app.add_subcommand("figure", "reproduce fig3, fig5 or fig6");
    std::string figure_id;
    figure_cmd->add_option("id", figure_id)->required();
    auto* mc_cmd = app.add_subcommand("mc-check", "Monte Carlo check of the heterodyne Fisher information");

    std::vector<char*> argv;
    std::string prog = "singular-sense";
    argv.push_back(prog.data());
    std::vector<std::string> owned(args);
    for (auto& a : owned) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitPass : kExitConfig;
    }

    RunConfig cfg;
    try {
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw ConfigError("cannot read config file " + config_path);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(f);
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError(std::string("config is not valid JSON: ") + e.what());
            }
            apply_config_json(cfg, j);
        }
        if (g) cfg.params.g = *g;
        if (gamma1) cfg.params.gamma1 = *gamma1;
        if (gamma2) cfg.params.gamma2 = *gamma2;
        if (kappa) cfg.params.kappa = *kappa;
        if (omega0) cfg.params.omega0 = *omega0;
        if (omega) cfg.params.omega = *omega;
        if (n_a) cfg.inputs.n_A = *n_a;
        if (n_b) cfg.inputs.n_B = *n_b;
        if (theta0) cfg.theta0 = *theta0;
        if (theta1) cfg.theta1 = *theta1;
        if (sign) cfg.sign = *sign;
        if (tmin) cfg.theta_min = *tmin;
        if (tmax) cfg.theta_max = *tmax;
        if (tpoints) cfg.theta_points = *tpoints;
        if (mp) cfg.mean_prefactor = *mp;
        if (pert) cfg.perturbation = *pert;
        if (nuis) cfg.nuisance = *nuis;
        if (out_dir) cfg.out_dir = *out_dir;
        if (seed) cfg.seed = *seed;
        if (samples) cfg.samples = *samples;
        if (exact_sld) cfg.exact_sld = true;
        if (cfg.out_dir.empty()) cfg.out_dir = default_out_dir();
        validate(cfg);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (*classify_cmd) {
            out << cmd_classify(cfg).dump() << '\n';
            return kExitPass;
        }
        if (*steady_cmd) {
            out << cmd_steady_state(cfg).dump() << '\n';
            return kExitPass;
        }
        if (*expand_cmd) {
            out << cmd_expand(cfg, check_theta).dump() << '\n';
            return kExitPass;
        }
        if (*bounds_cmd) {
            out << cmd_bounds(cfg).dump() << '\n';
            return kExitPass;
        }
        if (*sweep_cmd) {
            const SweepResult sw = sweep_error(sweep_spec(cfg));
            const auto path = std::filesystem::path(cfg.out_dir) / "sweep.csv";
            write_file(path, sweep_csv(sw));
            write_file(std::filesystem::path(cfg.out_dir) / "sweep_config.json", config_to_json(cfg).dump(2) + "\n");
            out << "wrote " << sw.rows.size() << " rows to " << path.string() << '\n';
            return kExitPass;
        }
        if (*figure_cmd) {
            FisherOptions fo;
            fo.mean_prefactor = cfg.mean_prefactor;
            const FigureVerdict v = reproduce_figure(figure_id, cfg.out_dir, fo, cfg.exact_sld);
            for (const auto& c : v.curves) {
                out << c.name << " slope=" << c.slope << " prefactor=" << c.prefactor
                    << " expected_slope=" << c.expected_slope << (c.pass ? " PASS" : " FAIL") << '\n';
            }
            out << "verdict written to " << (std::filesystem::path(cfg.out_dir) / (figure_id + "_verdict.json")).string()
                << '\n';
            return v.pass() ? kExitPass : kExitVerdictFail;
        }
        if (*mc_cmd) {
            const PointFisher pf = point_fisher(cfg);
            const FisherMatrix mc =
                cfim_monte_carlo(pf.state, pf.derivs.dmean, pf.derivs.dcov, cfg.samples, cfg.seed);
            const double rel = (mc.entries - pf.classical.entries).norm() / pf.classical.entries.norm();
            const bool pass = rel < 0.05;
            nlohmann::ordered_json j;
            j["theta0"] = cfg.theta0;
            j["samples"] = cfg.samples;
            j["seed"] = cfg.seed;
            j["analytic"] = matrix_json(pf.classical.entries);
            j["monte_carlo"] = matrix_json(mc.entries);
            j["relative_error"] = rel;
            j["pass"] = pass;
            write_file(std::filesystem::path(cfg.out_dir) / "mc_check.json", j.dump(2) + "\n");
            out << "mc-check relative_error=" << rel << (pass ? " PASS" : " FAIL") << '\n';
            return pass ? kExitPass : kExitVerdictFail;
        }
    } catch (const IoError& e) {
        err << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}

}  // namespace singular_sense
