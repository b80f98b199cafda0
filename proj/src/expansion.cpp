#include "singular_sense/expansion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "singular_sense/errors.hpp"

namespace singular_sense {

namespace {

void check_family(const MatrixFamily& f) {
    if (f.coeffs.empty()) throw std::invalid_argument("matrix family has no coefficients");
    const Eigen::Index n = f.dim();
    for (const Mat& a : f.coeffs)
        if (a.rows() != n || a.cols() != n)
            throw std::invalid_argument("matrix family coefficients must be square and equally sized");
}

Mat prefactor(const LaurentExpansion& e, Eigen::Index n) {
    if (!e.includes_symplectic_prefactor) return Mat::Identity(n, n);
    return symplectic_form(static_cast<int>(n / 2));
}

}  // namespace

Mat MatrixFamily::coeff(std::size_t k) const {
    if (k < coeffs.size()) return coeffs[k];
    return Mat::Zero(dim(), dim());
}

Mat augmented_matrix(const MatrixFamily& family, int t) {
    check_family(family);
    if (t < 0) throw std::invalid_argument("augmented_matrix: t must be non-negative");
    const Eigen::Index n = family.dim();
    Mat a = Mat::Zero(n * (t + 1), n * (t + 1));
    for (int i = 0; i <= t; ++i)
        for (int j = 0; j <= i; ++j) {
            const std::size_t k = static_cast<std::size_t>(i - j);
            if (k < family.coeffs.size()) a.block(i * n, j * n, n, n) = family.coeffs[k];
        }
    return a;
}

int pole_order(const MatrixFamily& family, double rel_tol, int max_order) {
    check_family(family);
    const int n = static_cast<int>(family.dim());
    int prev = 0;
    for (int t = 0; t <= max_order; ++t) {
        const int r = numerical_rank(augmented_matrix(family, t), rel_tol);
        if (r - prev == n) return t;
        prev = r;
    }
    throw NotInvertibleFamilyError("no pole order up to " + std::to_string(max_order) +
                                   "; A(theta) is not invertible near 0");
}

LaurentExpansion sm_expansion(const MatrixFamily& family, int r_max, double rel_tol) {
    if (r_max < 0) throw std::invalid_argument("sm_expansion: r_max must be non-negative");
    const int s = pole_order(family, rel_tol);
    const Eigen::Index n = family.dim();
    const Mat g = pseudo_inverse(augmented_matrix(family, s), rel_tol);
    auto block = [&](int j) -> Mat { return g.block(0, j * n, n, n); };

    LaurentExpansion e;
    e.pole_order = s;
    e.includes_symplectic_prefactor = true;
    e.truncation_order = r_max;
    e.coeffs.push_back(block(s));
    const Mat id = Mat::Identity(n, n);
    for (int k = 1; k <= r_max; ++k) {
        Mat xk = Mat::Zero(n, n);
        for (int j = 0; j <= s; ++j) {
            Mat inner = (j + k == s) ? id : Mat::Zero(n, n);
            for (int i = 1; i <= k; ++i)
                inner -= family.coeff(static_cast<std::size_t>(i + j)) * e.coeffs[static_cast<std::size_t>(k - i)];
            xk += block(j) * inner;
        }
        e.coeffs.push_back(xk);
    }
    while (e.coeffs.size() > 1 && e.coeffs.back().norm() < 1e-12) e.coeffs.pop_back();
    return e;
}

LaurentExpansion neumann_expansion(const Mat& h, const Mat& n0, int order) {
    if (order < 0) throw std::invalid_argument("neumann_expansion: order must be non-negative");
    const Eigen::Index n = h.rows();
    if (numerical_rank(h) < n)
        throw SingularMatrixError("H is singular; use sm_expansion for the singular case");
    const Mat hinv = h.fullPivLu().inverse();
    const Mat step = n0 * hinv;
    LaurentExpansion e;
    e.pole_order = 0;
    e.includes_symplectic_prefactor = true;
    e.truncation_order = order;
    Mat term = -hinv;
    for (int k = 0; k <= order; ++k) {
        e.coeffs.push_back(term);
        term = term * step;
    }
    return e;
}

Mat evaluate(const LaurentExpansion& exp, double theta) {
    if (exp.coeffs.empty()) throw std::invalid_argument("evaluate: empty expansion");
    if (theta == 0.0 && exp.pole_order > 0) throw PoleAtZeroError("expansion has a pole at theta = 0");
    const Eigen::Index n = exp.coeffs.front().rows();
    // Horner in theta
    Mat acc = Mat::Zero(n, n);
    for (auto it = exp.coeffs.rbegin(); it != exp.coeffs.rend(); ++it) acc = acc * theta + *it;
    acc *= std::pow(theta, -exp.pole_order);
    return prefactor(exp, n) * acc;
}

Mat direct_response(const Mat& m) {
    const Eigen::Index n = m.rows();
    if (m.cols() != n || n % 2 != 0) throw std::invalid_argument("direct_response: expected 2n x 2n matrix");
    Eigen::FullPivLU<Mat> lu(m);
    lu.setThreshold(1e-14);
    if (!lu.isInvertible()) throw SingularMatrixError("M is singular; the response function diverges");
    return symplectic_form(static_cast<int>(n / 2)) * lu.inverse();
}

Mat inverse_series_term(const Mat& h, const Mat& n0, int k) {
    const Mat ninv = n0.fullPivLu().inverse();
    Mat out = ninv;
    const Mat step = h * ninv;
    for (int i = 0; i < k; ++i) out = out * step;
    return out;
}

InverseSeriesReport inverse_series_diagnostic(const Mat& h, const Mat& n0, double tol) {
    InverseSeriesReport r;
    const Eigen::Index n = n0.rows();
    if (numerical_rank(n0) < n) return r;
    r.applicable = true;
    const Mat t = h * n0.fullPivLu().inverse();
    r.spectral_radius = t.eigenvalues().cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, t.norm());
    Mat power = Mat::Identity(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        power = power * t;
        r.terms_checked = static_cast<int>(k);
        if (power.norm() < tol * std::pow(scale, static_cast<double>(k))) {
            r.terminates = true;
            return r;
        }
    }
    r.divergent = true;
    return r;
}

}  // namespace singular_sense
