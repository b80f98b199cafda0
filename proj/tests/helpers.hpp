#pragma once

#include <complex>
#include <random>

#include "singular_sense/linalg.hpp"

namespace test_helpers {

using namespace singular_sense;

inline double rel_err(const Mat& a, const Mat& b) {
    return (a - b).norm() / b.norm();
}

inline Mat random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    return m;
}

inline Mat2c random_complex2(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Mat2c m;
    for (int i = 0; i < 4; ++i) m.data()[i] = std::complex<double>(n(rng), n(rng));
    return m;
}

inline Mat random_symmetric(std::mt19937_64& rng, Eigen::Index n) {
    const Mat a = random_matrix(rng, n, n);
    return 0.5 * (a + a.transpose());
}

/// Random 4x4 symplectic: passive rotation from a unitary, local squeezing, symmetric shear.
inline Mat4 random_symplectic(std::mt19937_64& rng) {
    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(
        Eigen::MatrixXcd(random_matrix(rng, 2, 2).cast<std::complex<double>>() +
                         std::complex<double>(0, 1) * random_matrix(rng, 2, 2).cast<std::complex<double>>()));
    const Mat4 passive = phase_space_rep(Mat2c(qr.householderQ() * Eigen::MatrixXcd::Identity(2, 2)));
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    Mat4 squeeze = Mat4::Zero();
    const double r1 = u(rng), r2 = u(rng);
    squeeze.diagonal() << std::exp(r1), std::exp(r2), std::exp(-r1), std::exp(-r2);
    Mat4 shear = Mat4::Identity();
    const Mat b = 0.5 * random_symmetric(rng, 2);
    shear.topRightCorner(2, 2) = b;
    return passive * squeeze * shear;
}

/// Random physical covariance S diag(v1, v2, v1, v2) S^T with v_k >= vmin.
inline Mat4 random_physical_cov(std::mt19937_64& rng, double vmin) {
    std::uniform_real_distribution<double> u(vmin, vmin + 4.0);
    const double v1 = u(rng), v2 = u(rng);
    const Mat4 s = random_symplectic(rng);
    Vec4 d(v1, v2, v1, v2);
    return s * d.asDiagonal() * s.transpose();
}

}  // namespace test_helpers
