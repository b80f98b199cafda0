#include "singular_sense/channel.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "singular_sense/errors.hpp"
#include "singular_sense/expansion.hpp"

namespace singular_sense {

ThermalInputs thermal_input(const InputSpec& spec) {
    if (!(spec.n_A >= 0.0) || !(spec.n_B >= 0.0))
        throw PhysicalityError("thermal occupations must be non-negative");
    ThermalInputs t;
    t.probe.mean = spec.displacement;
    t.probe.cov = (1.0 + 2.0 * spec.n_A) * Mat::Identity(4, 4);
    t.scatter_cov = spec.scatter_cov_override ? *spec.scatter_cov_override
                                              : Mat8((1.0 + 2.0 * spec.n_B) * Mat8::Identity());
    return t;
}

Mat48 xi_matrix(const SensorParams& p) {
    if (p.eta1() < 0.0 || p.eta2() < 0.0) throw PhysicalityError("xi_matrix: negative scattering rate");
    const double a = std::sqrt(p.eta1());
    const double b = std::sqrt(p.eta2());
    Mat48 xi = Mat48::Zero();
    xi(0, 0) = a;
    xi(2, 2) = a;
    xi(1, 5) = -b;
    xi(3, 7) = b;
    return xi;
}

static Mat4 scatter_term(const SensorParams& p, const ThermalInputs& t) {
    const Mat48 xi = xi_matrix(p);
    return xi * t.scatter_cov * xi.transpose();
}

Mat4 effective_input_cov(const SensorParams& p, const InputSpec& in) {
    const ThermalInputs t = thermal_input(in);
    return p.kappa * p.kappa * Mat4(t.probe.cov) + p.kappa * scatter_term(p, t);
}

GaussianState output_state(const Mat4& g, const SensorParams& p, const InputSpec& in) {
    const ThermalInputs t = thermal_input(in);
    const Mat4 a = Mat4::Identity() - p.kappa * g;
    GaussianState out;
    out.mean = a * in.displacement;
    out.cov = a * t.probe.cov * a.transpose() + p.kappa * g * scatter_term(p, t) * g.transpose();
    return out;
}

Mat4 response_derivative(const Mat4& g, const Mat4& n) {
    return g * n * symplectic_form4() * g;
}

GaussianState g_dominant_state(const Mat4& g, const SensorParams& p, const InputSpec& in) {
    GaussianState s;
    s.mean = -p.kappa * g * in.displacement;
    s.cov = g * effective_input_cov(p, in) * g.transpose();
    return s;
}

OutputDerivatives output_derivatives(const Mat4& g, const std::vector<Mat4>& dg, const SensorParams& p,
                                     const InputSpec& in, DerivativeMode mode) {
    const ThermalInputs t = thermal_input(in);
    const Mat4 va = t.probe.cov;
    const Mat4 lam = scatter_term(p, t);
    const Mat4 veff = p.kappa * p.kappa * va + p.kappa * lam;
    const Mat4 a = Mat4::Identity() - p.kappa * g;
    OutputDerivatives d;
    for (const Mat4& dgi : dg) {
        d.dmean.push_back(-p.kappa * dgi * in.displacement);
        Mat4 dv;
        if (mode == DerivativeMode::Exact) {
            const Mat4 da = -p.kappa * dgi;
            dv = da * va * a.transpose() + a * va * da.transpose() +
                 p.kappa * (dgi * lam * g.transpose() + g * lam * dgi.transpose());
        } else {
            dv = dgi * veff * g.transpose() + g * veff * dgi.transpose();
        }
        d.dcov.push_back(dv);
    }
    return d;
}

ResponseFrame response_frame(const Mat4& m, const std::vector<Mat4>& n, const SensorParams& p,
                             const InputSpec& in) {
    const ThermalInputs t = thermal_input(in);
    const Mat4 j = symplectic_form4();
    const Mat4 va = t.probe.cov;
    const Mat4 lam = scatter_term(p, t);

    ResponseFrame f;
    f.response = direct_response(m);
    f.inverse_response = -m * j;
    const Mat4 shifted = f.inverse_response - p.kappa * Mat4::Identity();
    f.mean = shifted * in.displacement;
    f.cov = shifted * va * shifted.transpose() + p.kappa * lam;
    f.cov = 0.5 * (f.cov + f.cov.transpose()).eval();
    f.heterodyne_cov = f.cov + f.inverse_response * f.inverse_response.transpose();
    const Vec4 g_sin = f.response * in.displacement;
    for (const Mat4& ni : n) {
        const Mat4 pj = ni * j * f.response;  // G^{-1} dG
        const Mat4 dt = -ni * j;
        const Mat4 dshift = dt * va * shifted.transpose() + shifted * va * dt.transpose();
        Mat4 w = pj * f.cov + dshift + f.cov * pj.transpose();
        f.dcov.push_back(0.5 * (w + w.transpose()));
        f.dmean.push_back(-p.kappa * ni * j * g_sin);
    }
    return f;
}

double frame_uncertainty_margin(const ResponseFrame& f) {
    using C = std::complex<double>;
    const Mat4 tjt = f.inverse_response * symplectic_form4() * f.inverse_response.transpose();
    const Eigen::Matrix4cd h = f.cov.cast<C>() + C(0.0, 1.0) * tjt.cast<C>();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() / std::max(1.0, f.cov.norm());
}

bool is_physical(const Mat& cov, double tol) {
    try {
        return williamson(cov).symplectic_eigenvalues.minCoeff() >= 1.0 - tol;
    } catch (const PhysicalityError&) {
        return false;
    }
}

}  // namespace singular_sense
