#include "singular_sense/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "singular_sense/errors.hpp"

namespace singular_sense {

namespace {
const std::complex<double> kI(0.0, 1.0);
}

SensorParams params_from_rates(double g, double eta1, double eta2, double kappa, double omega0,
                               double omega) {
    SensorParams p;
    p.g = g;
    p.kappa = kappa;
    p.gamma1 = 0.5 * (eta1 + kappa);
    p.gamma2 = 0.5 * (eta2 - kappa);
    p.omega0 = omega0;
    p.omega = omega;
    return p;
}

void check_physical(const SensorParams& p) {
    for (double x : {p.g, p.gamma1, p.gamma2, p.kappa, p.omega0, p.omega})
        if (!std::isfinite(x)) throw PhysicalityError("sensor parameters must be finite");
    if (p.eta1() < 0.0) throw PhysicalityError("eta1 = 2 gamma1 - kappa is negative");
    if (p.eta2() < 0.0) throw PhysicalityError("eta2 = 2 gamma2 + kappa is negative");
}

Mat2c build_generator(const SensorParams& p) {
    check_physical(p);
    Mat2c h;
    h << -kI * p.gamma1, p.g, p.g, kI * p.gamma2;
    return h;
}

EigenData eigensystem(const Mat2c& h) {
    const std::complex<double> mean = 0.5 * (h(0, 0) + h(1, 1));
    const std::complex<double> half_diff = 0.5 * (h(0, 0) - h(1, 1));
    const std::complex<double> root = std::sqrt(half_diff * half_diff + h(0, 1) * h(1, 0));
    EigenData d;
    d.lambda_plus = mean + root;
    d.lambda_minus = mean - root;
    d.e_plus << d.lambda_plus - h(1, 1), h(1, 0);
    d.e_minus << d.lambda_minus - h(1, 1), h(1, 0);
    return d;
}

RegimeReport classify(const SensorParams& p, double tol) {
    const Mat2c h = build_generator(p);
    RegimeReport r;
    r.eigen = eigensystem(h);
    const double gp = p.gamma_plus();
    const double gm = p.gamma_minus();
    r.det_h = std::abs(h.determinant());
    r.is_singular = std::abs(p.g * p.g - p.gamma1 * p.gamma2) < tol;
    r.is_balanced = std::abs(p.gamma1 - p.gamma2) < tol;
    r.is_pt_symmetric = p.g >= gp - tol && std::abs(gm) < tol;
    r.is_ep = std::abs(p.g - gp) < tol;
    const double max_im = std::max(r.eigen.lambda_plus.imag(), r.eigen.lambda_minus.imag());
    r.is_stable = max_im < -tol;
    r.at_lasing_threshold = std::abs(max_im) <= tol;
    const Mat2c m = p.detuning() * Mat2c::Identity() - h;
    r.det_m = phase_space_rep(m).determinant();
    return r;
}

double lasing_threshold(const SensorParams& p) {
    if (p.gamma1 == 0.0) return 0.0;
    return std::min(p.gamma1, p.g * p.g / p.gamma1);
}

SteadyState steady_state_occupations(const SensorParams& p) {
    const double g2 = p.g * p.g;
    const double gap = g2 - p.gamma1 * p.gamma2;
    const double denom = (p.gamma1 - p.gamma2) * gap;
    SteadyState s;
    if (denom == 0.0) {
        s.status = SteadyStateStatus::AtThreshold;
        return s;
    }
    s.n1 = g2 * p.gamma2 / denom;
    s.n2 = (gap + g2 * p.gamma2) / denom;
    // a positive denominator can also come from both factors being negative (deep in the lasing phase)
    const bool above = p.gamma2 >= lasing_threshold(p);
    if (denom < 0.0 || s.n1 < 0.0 || s.n2 < 0.0 || above) s.status = SteadyStateStatus::Unstable;
    return s;
}

std::vector<double> singular_detunings(const SensorParams& p, double tol) {
    const EigenData d = eigensystem(build_generator(p));
    std::vector<double> out;
    for (const auto& l : {d.lambda_minus, d.lambda_plus}) {
        if (std::abs(l.imag()) >= tol) continue;
        const bool dup = std::any_of(out.begin(), out.end(),
                                     [&](double x) { return std::abs(x - l.real()) < tol; });
        if (!dup) out.push_back(l.real());
    }
    std::sort(out.begin(), out.end());
    return out;
}

PerturbationSpec perturbation(const std::string& name) {
    Mat2c m;
    if (name == "two_mode_symmetric") {
        m << 1, 0, 0, 1;
    } else if (name == "two_mode_asymmetric") {
        m << 1, 0, 0, -1;
    } else if (name == "one_mode") {
        m << 1, 0, 0, 0;
    } else if (name == "coupling" || name == "nuisance_NS") {
        m << 0, 1, 1, 0;
    } else if (name == "nonreciprocal") {
        m << 0, 1, 0, 0;
    } else if (name == "nuisance_S") {
        // sigma_x - i sigma_z
        m << -kI, 1, 1, kI;
    } else {
        throw std::invalid_argument("unknown perturbation: " + name);
    }
    return {name, m};
}

std::vector<std::string> perturbation_names() {
    return {"two_mode_symmetric", "two_mode_asymmetric", "one_mode", "coupling",
            "nonreciprocal", "nuisance_NS", "nuisance_S"};
}

Mat4 perturbed_generator(const SensorParams& p, const std::vector<PerturbationSpec>& specs,
                         const std::vector<double>& thetas) {
    if (specs.size() != thetas.size())
        throw std::invalid_argument("perturbed_generator: need one theta per perturbation");
    Mat2c m = p.detuning() * Mat2c::Identity() - build_generator(p);
    for (std::size_t i = 0; i < specs.size(); ++i) m += thetas[i] * specs[i].matrix;
    return phase_space_rep(m);
}

Mat4 ep_generator_phase_space() {
    SensorParams p;
    return phase_space_rep(build_generator(p));
}

}  // namespace singular_sense
