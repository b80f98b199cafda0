#pragma once

#include <functional>
#include <string>
#include <vector>

#include "singular_sense/channel.hpp"
#include "singular_sense/fisher.hpp"
#include "singular_sense/sensor.hpp"

namespace singular_sense {

/// Thermal occupation factors 1 + 2n and the per-mode effective input noise
/// p_i = kappa^2 (1 + 2 n_A) + kappa eta_i (1 + 2 n_B).
struct ThermalFactors {
    double nbar_A;
    double nbar_B;
    double p1;
    double p2;
};

ThermalFactors thermal_factors(const SensorParams& p, const InputSpec& in);

struct SCoefficients {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

/// F00 ~ alpha theta0^-4 + 2 beta theta0^-3 + gamma theta0^-2 for the balanced EP generator
/// perturbed by the identity, with the singularity-keeping nuisance at theta1.
/// Zero-displacement thermal inputs use the closed form; anything else is assembled from the series.
SCoefficients s_coefficients(double theta1, const InputSpec& in, const SensorParams& p,
                             const FisherOptions& opts = {});

/// Same coefficients read off the assembled power series of the asymptotic QFIM.
SCoefficients s_coefficients_numeric(double theta1, const InputSpec& in, const SensorParams& p,
                                     const FisherOptions& opts = {});

struct Theta1ZeroCoefficients {
    double alpha00 = 0.0;
    double beta00 = 0.0;
    double alpha01 = 0.0;
    double alpha11 = 0.0;
    double beta11 = 0.0;
};

/// Coupling nuisance at theta1 = 0: F00 ~ a00 t^-4 + b00 t^-2, F01 ~ a01 t^-3, F11 ~ a11 t^-4 + b11 t^-2.
Theta1ZeroCoefficients theta1zero_coeffs(const InputSpec& in, const SensorParams& p);

/// F00 at theta0 = 0 with a coupling nuisance theta1 != 0 (kappa = 1, zero-displacement thermal inputs).
double ns_thermal_f00(double theta1, const InputSpec& in, const SensorParams& p);

struct ClosedFormCoefficients {
    double C_nonsing = 0.0;   ///< limit of F00 at theta0 -> 0 for a regular generator (NaN if singular)
    double A_sing = 0.0;      ///< theta0^{2s} F00 limit for a singular generator (NaN if regular)
    SCoefficients s_case;
    Theta1ZeroCoefficients ns_zero;
    std::function<double(double)> f00_ns;
};

/// Collects the closed forms for generator p probed with the two-mode perturbation.
ClosedFormCoefficients closed_form_coefficients(const SensorParams& p, const InputSpec& in, double theta1_s,
                                                const FisherOptions& opts = {});

enum class AsymptoteKind { SingleSingular, NuisanceNSAtZero, NuisanceS };

struct Asymptote {
    double exponent = 0.0;
    double prefactor = 0.0;
    double next_order = 0.0;  ///< coefficient of theta^{exponent+2} where known
};

Asymptote error_asymptote(AsymptoteKind kind, const SCoefficients& s, const Theta1ZeroCoefficients& z);

/// One theta0 sweep: primary perturbation, optional nuisance held at theta1.
/// sign flips the direction of the primary perturbation (M contains sign * theta0 * n0).
struct SweepSpec {
    SensorParams params;
    InputSpec inputs;
    std::string primary = "two_mode_symmetric";
    std::string nuisance;  ///< empty: single-parameter problem
    double theta1 = 0.0;
    double sign = 1.0;
    double grid_min = 1e-4;
    double grid_max = 1.0;
    int grid_points = 60;
    bool exact_sld = false;
    FisherOptions fisher;
};

struct SweepRow {
    double theta0 = 0.0;
    Bounds bounds;
    bool stable = false;
    bool singular = false;
    bool valid = true;  ///< false when the point could not be evaluated
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

std::vector<double> log_grid(double lo, double hi, int n);

SweepRow evaluate_point(const SweepSpec& spec, double theta0);
SweepResult sweep_error(const SweepSpec& spec);

enum class Metric { DeltaC, DeltaQ, NuisanceC, NuisanceQ };

const char* to_string(Metric m);
double metric_value(const SweepRow& row, Metric m);

struct SlopeFit {
    double slope = 0.0;
    double prefactor = 0.0;
    int points = 0;
};

/// Least squares of log10(err) against log10(theta) for theta in [lo, hi]; needs at least 5 points.
SlopeFit fit_slope(const std::vector<double>& theta, const std::vector<double>& err, double lo, double hi);
SlopeFit fit_slope(const SweepResult& sweep, Metric m, double lo, double hi);

enum class Expectation { Vanishing, Plateau };

struct CurveSpec {
    std::string name;
    SweepSpec sweep;
    Metric metric = Metric::DeltaQ;
    Expectation expectation = Expectation::Vanishing;
    double expected_slope = 1.0;
    double fit_min = 1e-4;
    double fit_max = 1e-2;
};

struct FigureConfig {
    std::string id;
    SensorParams params;
    InputSpec inputs;
    std::vector<CurveSpec> curves;
};

/// Panel ids: fig3, lt1a, lt2a, una, lt1b, lt2b, unb, fig6.
FigureConfig figure_config(const std::string& id);
/// Figure ids: fig3, fig5, fig6.
std::vector<std::string> figure_panels(const std::string& figure);

struct CurveVerdict {
    std::string name;
    double slope = 0.0;
    double prefactor = 0.0;
    double expected_slope = 0.0;
    bool pass = false;
    std::string csv_path;
};

struct FigureVerdict {
    std::string figure;
    std::vector<CurveVerdict> curves;
    bool pass() const;
};

/// Writes one CSV per curve into out_dir (when non-empty) and returns the verdict.
FigureVerdict reproduce_figure(const std::string& figure, const std::string& out_dir,
                               const FisherOptions& opts = {}, bool exact_sld = false);

/// Canonical CSV body for a sweep, 17 significant digits.
std::string sweep_csv(const SweepResult& sweep);
std::string verdict_json(const FigureVerdict& v);

}  // namespace singular_sense
