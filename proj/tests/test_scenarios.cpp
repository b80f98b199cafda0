#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "singular_sense/errors.hpp"
#include "singular_sense/scenarios.hpp"

using namespace singular_sense;

namespace {
SensorParams ep_params() { return params_from_rates(1.0, 1.0, 3.0, 1.0); }

Mat4 ps(const std::string& name) { return phase_space_rep(perturbation(name).matrix); }

// Asymptotic QFIM series for primary two_mode_symmetric plus one nuisance held at theta1.
std::vector<std::vector<Vec>> series_with(const std::string& nuisance, double theta1, const InputSpec& in,
                                          const SensorParams& p) {
    const Mat4 a0 = perturbed_generator(p, {perturbation(nuisance)}, {theta1});
    const auto e = sm_expansion(MatrixFamily{{Mat(a0), Mat(ps("two_mode_symmetric"))}});
    return qfim_asymptotic_series(e, {ps("two_mode_symmetric"), ps(nuisance)}, p, in);
}
}  // namespace

TEST_CASE("singularity-preserving nuisance coefficients") {
    const SensorParams p = ep_params();
    const InputSpec in;
    auto s = s_coefficients(0.0, in, p);
    CHECK(s.alpha == doctest::Approx(9.0));
    CHECK(s.beta == 0.0);
    CHECK(s.gamma == doctest::Approx(8.0));
    CHECK(s_coefficients(0.25, in, p).alpha == doctest::Approx(5.0625));
    CHECK(s_coefficients(1.0, in, p).alpha == 0.0);

    for (double t1 : {0.0, 0.25, 0.5}) {
        CAPTURE(t1);
        const auto closed = s_coefficients(t1, in, p);
        const auto numeric = s_coefficients_numeric(t1, in, p);
        CHECK(numeric.alpha == doctest::Approx(closed.alpha).epsilon(1e-9));
        CHECK(std::abs(numeric.beta - closed.beta) < 1e-8);
        CHECK(numeric.gamma == doctest::Approx(closed.gamma).epsilon(1e-9));
    }

    InputSpec hot;
    hot.n_A = 2.0;
    hot.n_B = 0.5;
    const auto a = s_coefficients(0.1, hot, p), b = s_coefficients_numeric(0.1, hot, p);
    CHECK(a.alpha == doctest::Approx(b.alpha).epsilon(1e-9));
    CHECK(a.gamma == doctest::Approx(b.gamma).epsilon(1e-9));

    // the closed form carries kappa through the per-mode noise factors
    SensorParams k = p;
    k.kappa = 0.5;
    const auto ck = s_coefficients(0.25, hot, k), nk = s_coefficients_numeric(0.25, hot, k);
    CHECK(ck.alpha == doctest::Approx(nk.alpha).epsilon(1e-9));
    CHECK(std::abs(nk.beta) < 1e-8);
    CHECK(ck.gamma == doctest::Approx(nk.gamma).epsilon(1e-9));
}

TEST_CASE("coupling nuisance coefficients at theta1 = 0") {
    const SensorParams p = ep_params();
    const InputSpec in;
    const auto z = theta1zero_coeffs(in, p);
    CHECK(z.alpha00 == doctest::Approx(9.0));
    CHECK(z.alpha01 == doctest::Approx(17.0));
    CHECK(z.alpha11 == doctest::Approx(17.0));

    // series oracle: F00 = a00 t^-4 + b00 t^-2, F01 = a01 t^-3, F11 = a11 t^-4 + b11 t^-2
    const auto s = series_with("nuisance_NS", 0.0, in, p);
    CHECK(s[0][0](0) == doctest::Approx(z.alpha00).epsilon(1e-9));
    CHECK(std::abs(s[0][0](1)) < 1e-9);
    CHECK(s[0][0](2) == doctest::Approx(z.beta00).epsilon(1e-9));
    CHECK(std::abs(s[0][1](0)) < 1e-9);
    CHECK(std::abs(s[0][1](1)) == doctest::Approx(z.alpha01).epsilon(1e-9));
    CHECK(s[1][1](0) == doctest::Approx(z.alpha11).epsilon(1e-9));
    CHECK(s[1][1](2) == doctest::Approx(z.beta11).epsilon(1e-9));
    CHECK(z.beta00 == doctest::Approx(8.0));
    CHECK(z.beta11 == doctest::Approx(9.0));

    InputSpec hot;
    hot.n_A = 3.0;
    hot.n_B = 0.2;
    const auto zh = theta1zero_coeffs(hot, p);
    const auto sh = series_with("nuisance_NS", 0.0, hot, p);
    CHECK(sh[0][0](0) == doctest::Approx(zh.alpha00).epsilon(1e-9));
    CHECK(sh[0][0](2) == doctest::Approx(zh.beta00).epsilon(1e-9));
    CHECK(std::abs(sh[0][1](1)) == doctest::Approx(zh.alpha01).epsilon(1e-9));
    CHECK(sh[1][1](2) == doctest::Approx(zh.beta11).epsilon(1e-9));
}

TEST_CASE("coupling nuisance closed form at theta0 = 0") {
    const SensorParams p = ep_params();
    const InputSpec in;
    for (double t1 : {0.1, 0.03, 0.4}) {
        CAPTURE(t1);
        const Mat4 m = perturbed_generator(p, {perturbation("nuisance_NS")}, {t1});
        const ResponseFrame f = response_frame(m, {ps("two_mode_symmetric")}, p, in);
        const double pipeline = qfim_noisy({f.mean, f.cov}, f.dmean, f.dcov).entries(0, 0);
        CHECK(std::abs(ns_thermal_f00(t1, in, p) - pipeline) / pipeline < 1e-8);
    }
    std::vector<double> t, inv;
    for (double x : log_grid(1e-3, 1e-2, 20)) {
        t.push_back(x);
        inv.push_back(1.0 / ns_thermal_f00(x, in, p));
    }
    CHECK(fit_slope(t, inv, 1e-3, 1e-2).slope == doctest::Approx(2.0).epsilon(0.025));

    CHECK_THROWS_AS(ns_thermal_f00(0.0, in, p), std::invalid_argument);
    SensorParams k2 = p;
    k2.kappa = 0.5;
    CHECK_THROWS_AS(ns_thermal_f00(0.1, in, k2), std::invalid_argument);
}

TEST_CASE("error asymptotes") {
    const SensorParams p = ep_params();
    const auto z = theta1zero_coeffs(InputSpec{}, p);
    auto a = error_asymptote(AsymptoteKind::SingleSingular, {}, z);
    CHECK(a.exponent == 2.0);
    CHECK(a.prefactor == doctest::Approx(1.0 / 3.0));
    for (double t1 : {0.0, 0.25}) {
        a = error_asymptote(AsymptoteKind::NuisanceS, s_coefficients(t1, InputSpec{}, p), z);
        CHECK(a.exponent == 1.0);
        CHECK(a.prefactor == doctest::Approx(1.0 / std::sqrt(8.0)));
    }
    a = error_asymptote(AsymptoteKind::NuisanceNSAtZero, {}, z);
    CHECK(a.exponent == 2.0);
    CHECK(a.prefactor == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(error_asymptote(AsymptoteKind::NuisanceS, SCoefficients{1.0, 2.0, 3.0}, z), std::domain_error);
}

TEST_CASE("closed form collection") {
    const auto ep = closed_form_coefficients(ep_params(), InputSpec{}, 0.25);
    CHECK(std::isnan(ep.C_nonsing));
    CHECK(ep.A_sing == doctest::Approx(9.0));
    CHECK(ep.s_case.alpha == doctest::Approx(5.0625));
    REQUIRE(ep.f00_ns);
    CHECK(ep.f00_ns(0.1) == doctest::Approx(ns_thermal_f00(0.1, InputSpec{}, ep_params())));

    const auto reg = closed_form_coefficients(params_from_rates(1.0, 1.0, 2.0, 1.0), InputSpec{}, 0.0);
    CHECK(std::isnan(reg.A_sing));
    CHECK(reg.C_nonsing > 0.0);
}

TEST_CASE("slope fit") {
    std::vector<double> t = log_grid(1e-4, 1e-1, 30), sq, lin;
    for (double x : t) {
        sq.push_back(x * x);
        lin.push_back(0.35355 * x);
    }
    CHECK(std::abs(fit_slope(t, sq, 1e-4, 1e-1).slope - 2.0) < 1e-9);
    const auto f = fit_slope(t, lin, 1e-4, 1e-1);
    CHECK(std::abs(f.slope - 1.0) < 1e-9);
    CHECK(std::abs(f.prefactor - 0.35355) < 1e-6);
    CHECK_THROWS_AS(fit_slope(t, sq, 1e-4, 2e-4), std::invalid_argument);
}

TEST_CASE("log grid") {
    const auto g = log_grid(1e-4, 1.0, 5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == doctest::Approx(1e-4));
    CHECK(g[2] == doctest::Approx(1e-2));
    CHECK(g.back() == doctest::Approx(1.0));
    CHECK_THROWS(log_grid(0.0, 1.0, 5));
}

TEST_CASE("sweep point flags and information ordering") {
    const FigureConfig cfg = figure_config("fig3");
    for (const auto& c : cfg.curves) {
        SweepSpec s = c.sweep;
        s.grid_points = 12;
        for (const auto& r : sweep_error(s).rows) {
            CHECK(r.valid);
            CHECK(r.singular);
            CHECK(r.stable);
            CHECK(r.bounds.delta_c >= r.bounds.delta_q * (1 - 1e-9));
            CHECK(r.bounds.Delta_c >= r.bounds.Delta_q * (1 - 1e-9));
            CHECK(r.bounds.Delta_q >= r.bounds.delta_q * (1 - 1e-9));
        }
    }
    const FigureConfig lt2b = figure_config("lt2b");
    CHECK_FALSE(evaluate_point(lt2b.curves[0].sweep, 1e-3).singular);
}

TEST_CASE("sweep matches the exact SLD route") {
    SweepSpec s = figure_config("fig3").curves[2].sweep;
    s.grid_min = 1e-2;
    s.grid_points = 4;
    const auto noisy = sweep_error(s);
    s.exact_sld = true;
    const auto exact = sweep_error(s);
    for (std::size_t i = 0; i < noisy.rows.size(); ++i) {
        CHECK(exact.rows[i].bounds.delta_q <= noisy.rows[i].bounds.delta_q * (1 + 1e-6));
        CHECK(exact.rows[i].bounds.delta_q == doctest::Approx(noisy.rows[i].bounds.delta_q).epsilon(0.2));
    }
}

TEST_CASE("figure configurations") {
    CHECK(figure_config("fig3").curves.size() == 6);
    CHECK(figure_panels("fig5").size() == 6);
    std::size_t total = 0;
    for (const auto& panel : figure_panels("fig5")) total += figure_config(panel).curves.size();
    CHECK(total == 12);
    const auto f6 = figure_config("fig6");
    CHECK(f6.params.g == 2.0);
    CHECK(f6.params.gamma1 == 4.0);
    CHECK(f6.params.gamma2 == 1.0);
    CHECK_THROWS_AS(figure_config("fig9"), ConfigError);
    CHECK_THROWS_AS(figure_panels("fig4"), ConfigError);
}

TEST_CASE("csv and verdict formats") {
    SweepResult r;
    SweepRow row;
    row.theta0 = 0.5;
    row.bounds = {1.0, 0.5, 2.0, 0.75};
    row.stable = true;
    r.rows.push_back(row);
    CHECK(sweep_csv(r) == "theta0,delta_c,delta_q,Delta_c,Delta_q,stable,singular\n0.5,1,0.5,2,0.75,1,0\n");

    const std::string dir = (std::filesystem::temp_directory_path() / "ss_scenarios_fig6").string();
    std::filesystem::remove_all(dir);
    const FigureVerdict v = reproduce_figure("fig6", dir);
    CHECK(v.pass());
    REQUIRE(v.curves.size() == 2);
    CHECK(std::filesystem::exists(dir + "/fig6_coupling_plus.csv"));
    std::ifstream vf(dir + "/fig6_verdict.json");
    const auto j = nlohmann::json::parse(vf);
    CHECK(j["figure"] == "fig6");
    CHECK(j["metadata"]["kappa"] == 1.0);
    CHECK(j["metadata"]["pass"] == true);
    CHECK(j["curves"].size() == 2);
    CHECK(j["curves"][0].contains("slope"));
    CHECK(j["curves"][0].contains("prefactor"));
    CHECK(j["curves"][0].contains("expected_slope"));

    std::ifstream cf(dir + "/fig6_coupling_plus.csv");
    std::string header;
    std::getline(cf, header);
    CHECK(header == "theta0,delta_c,delta_q,Delta_c,Delta_q,stable,singular");

    // repeat run writes identical bytes
    std::stringstream first;
    first << std::ifstream(dir + "/fig6_coupling_plus.csv").rdbuf();
    reproduce_figure("fig6", dir);
    std::stringstream second;
    second << std::ifstream(dir + "/fig6_coupling_plus.csv").rdbuf();
    CHECK(first.str() == second.str());
    std::filesystem::remove_all(dir);

    CHECK_THROWS_AS(reproduce_figure("fig6", "/proc/no_such_dir/out"), IoError);
}
