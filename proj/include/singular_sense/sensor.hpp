#pragma once

#include <complex>
#include <string>
#include <vector>

#include "singular_sense/linalg.hpp"

namespace singular_sense {

/// Two coupled cavities: mode 1 lossy (gamma1), mode 2 with gain (gamma2), coupling g,
/// probe coupling kappa, resonance omega0 and probe frequency omega.
struct SensorParams {
    double g = 1.0;
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    double kappa = 1.0;
    double omega0 = 0.0;
    double omega = 0.0;

    double eta1() const { return 2.0 * gamma1 - kappa; }
    double eta2() const { return 2.0 * gamma2 + kappa; }
    double gamma_plus() const { return 0.5 * (gamma2 + gamma1); }
    double gamma_minus() const { return 0.5 * (gamma2 - gamma1); }
    double detuning() const { return omega - omega0; }
};

/// Build parameters from scattering rates instead of effective rates.
SensorParams params_from_rates(double g, double eta1, double eta2, double kappa,
                               double omega0 = 0.0, double omega = 0.0);

/// Throws PhysicalityError unless all fields are finite and eta1, eta2 >= 0.
void check_physical(const SensorParams& p);

/// Generator [[-i gamma1, g], [g, i gamma2]]. Validates eta1, eta2 >= 0.
Mat2c build_generator(const SensorParams& p);

struct EigenData {
    std::complex<double> lambda_plus;
    std::complex<double> lambda_minus;
    Eigen::Vector2cd e_plus;   ///< unnormalised, (lambda - H11, H10)
    Eigen::Vector2cd e_minus;
};

EigenData eigensystem(const Mat2c& h);

struct RegimeReport {
    bool is_singular = false;
    bool is_pt_symmetric = false;
    bool is_ep = false;
    bool is_balanced = false;
    bool is_stable = false;
    bool at_lasing_threshold = false;
    double det_h = 0.0;   ///< |det H|
    double det_m = 0.0;   ///< det of the phase-space (omega-omega0) I - H, equals |det(...)|^2
    EigenData eigen;
};

RegimeReport classify(const SensorParams& p, double tol = 1e-9);

/// gamma2 above which the system lases: min(gamma1, g^2 / gamma1), 0 when gamma1 = 0.
double lasing_threshold(const SensorParams& p);

enum class SteadyStateStatus { Stable, Unstable, AtThreshold };

struct SteadyState {
    SteadyStateStatus status = SteadyStateStatus::Stable;
    double n1 = 0.0;
    double n2 = 0.0;
};

SteadyState steady_state_occupations(const SensorParams& p);

/// Detunings omega - omega0 at which det((omega-omega0) I - H) = 0, i.e. real eigenvalues of H.
std::vector<double> singular_detunings(const SensorParams& p, double tol = 1e-9);

struct PerturbationSpec {
    std::string name;
    Mat2c matrix;
};

/// Known names: two_mode_symmetric, two_mode_asymmetric, one_mode, coupling,
/// nonreciprocal, nuisance_NS, nuisance_S.
PerturbationSpec perturbation(const std::string& name);
std::vector<std::string> perturbation_names();

/// Phase-space M = (omega - omega0) I - H + sum_i theta_i n_i.
Mat4 perturbed_generator(const SensorParams& p, const std::vector<PerturbationSpec>& specs,
                         const std::vector<double>& thetas);

/// The balanced EP generator with g = gamma1 = gamma2 = 1 in phase space.
Mat4 ep_generator_phase_space();

}  // namespace singular_sense
