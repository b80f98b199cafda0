#include "singular_sense/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "singular_sense/errors.hpp"

namespace singular_sense {

Mat phase_space_rep(const CMat& m) {
    const Eigen::Index n = m.rows();
    if (m.cols() != n) throw std::invalid_argument("phase_space_rep: matrix must be square");
    Mat out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = m.real();
    out.topRightCorner(n, n) = -m.imag();
    out.bottomLeftCorner(n, n) = m.imag();
    out.bottomRightCorner(n, n) = m.real();
    return out;
}

Mat4 phase_space_rep(const Mat2c& m) {
    return phase_space_rep(CMat(m));
}

Mat symplectic_form(int n_modes) {
    if (n_modes < 1) throw std::invalid_argument("symplectic_form: need at least one mode");
    const int n = n_modes;
    Mat j = Mat::Zero(2 * n, 2 * n);
    j.topRightCorner(n, n) = -Mat::Identity(n, n);
    j.bottomLeftCorner(n, n) = Mat::Identity(n, n);
    return j;
}

Mat4 symplectic_form4() {
    return symplectic_form(2);
}

int numerical_rank(const Mat& a, double rel_tol) {
    if (a.size() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(a);
    const Vec& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    const double cut = rel_tol * s(0);
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > cut) ++r;
    return r;
}

Mat pseudo_inverse(const Mat& a, double rel_tol) {
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec& s = svd.singularValues();
    Mat out = Mat::Zero(a.cols(), a.rows());
    if (s.size() == 0 || s(0) == 0.0) return out;
    const double cut = rel_tol * s(0);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) <= cut) continue;
        out += svd.matrixV().col(i) * (svd.matrixU().col(i).transpose() / s(i));
    }
    return out;
}

static Mat symmetric_checked(const Mat& v, const char* who) {
    if (v.rows() != v.cols() || v.rows() % 2 != 0)
        throw std::invalid_argument(std::string(who) + ": expected a square matrix of even size");
    if (!v.allFinite()) throw PhysicalityError(std::string(who) + ": non-finite entries");
    const double scale = std::max(1.0, v.norm());
    if ((v - v.transpose()).norm() > 1e-10 * scale)
        throw PhysicalityError(std::string(who) + ": matrix is not symmetric");
    return 0.5 * (v + v.transpose());
}

Mat sqrtm_spd(const Mat& v) {
    Eigen::SelfAdjointEigenSolver<Mat> es(v);
    if (es.info() != Eigen::Success) throw Error("sqrtm_spd: eigensolver failed");
    if (es.eigenvalues().minCoeff() <= 0.0) throw PhysicalityError("sqrtm_spd: matrix is not positive definite");
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

WilliamsonResult williamson(const Mat& v_in) {
    const Mat v = symmetric_checked(v_in, "williamson");
    const int n = static_cast<int>(v.rows() / 2);
    const Mat r = sqrtm_spd(v);
    const Mat j = symplectic_form(n);
    // i R J R is Hermitian; its positive eigenvalues are the symplectic eigenvalues.
    const CMat k = std::complex<double>(0.0, 1.0) * (r * j * r).cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<CMat> es(k);
    if (es.info() != Eigen::Success) throw Error("williamson: eigensolver failed");

    // eigenvalues ascending: the upper half are the positive ones
    Vec vals(n);
    Mat x(2 * n, n), y(2 * n, n);
    for (int m = 0; m < n; ++m) {
        const Eigen::Index idx = n + m;
        vals(m) = es.eigenvalues()(idx);
        const Eigen::VectorXcd w = es.eigenvectors().col(idx);
        x.col(m) = std::sqrt(2.0) * w.real();
        y.col(m) = std::sqrt(2.0) * w.imag();
    }
    Mat o(2 * n, 2 * n);
    o << x, y;
    Vec inv_sqrt(2 * n);
    inv_sqrt << vals.cwiseSqrt().cwiseInverse(), vals.cwiseSqrt().cwiseInverse();
    WilliamsonResult res;
    res.transform = r * o * inv_sqrt.asDiagonal();
    res.symplectic_eigenvalues = vals;
    return res;
}

double uncertainty_margin(const Mat& v) {
    const int n = static_cast<int>(v.rows() / 2);
    const CMat h = v.cast<std::complex<double>>() +
                   std::complex<double>(0.0, 1.0) * symplectic_form(n).cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace singular_sense
