#pragma once

#include <Eigen/Dense>

namespace singular_sense {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using Mat2c = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;

/// Real 2n x 2n representation [[Re m, -Im m], [Im m, Re m]] of a complex n x n matrix.
Mat phase_space_rep(const CMat& m);
Mat4 phase_space_rep(const Mat2c& m);

/// Symplectic form J = [[0, -I], [I, 0]] in qq..pp ordering.
Mat symplectic_form(int n_modes);
Mat4 symplectic_form4();

/// Number of singular values above rel_tol * largest singular value.
int numerical_rank(const Mat& a, double rel_tol = 1e-10);

/// Moore-Penrose inverse via SVD, dropping singular values below rel_tol * largest.
Mat pseudo_inverse(const Mat& a, double rel_tol = 1e-10);

struct WilliamsonResult {
    Mat transform;      ///< symplectic D with D * diag(v, v) * D^T = V
    Vec symplectic_eigenvalues;  ///< ascending, one per mode
};

/// Williamson normal form of a real symmetric positive definite 2n x 2n matrix.
/// Throws PhysicalityError if V is not symmetric positive definite.
WilliamsonResult williamson(const Mat& v);

/// Smallest eigenvalue of the Hermitian matrix V + iJ (>= 0 for a physical covariance).
double uncertainty_margin(const Mat& v);

/// Symmetric square root of a symmetric positive definite matrix.
Mat sqrtm_spd(const Mat& v);

}  // namespace singular_sense
