#pragma once

#include <vector>

#include "singular_sense/linalg.hpp"

namespace singular_sense {

/// Matrix polynomial A(theta) = sum_k theta^k A_k with square coefficients of equal size.
struct MatrixFamily {
    std::vector<Mat> coeffs;
    Eigen::Index dim() const { return coeffs.empty() ? 0 : coeffs.front().rows(); }
    Mat coeff(std::size_t k) const;
};

/// Block lower-triangular Toeplitz matrix of size n(t+1) built from A_0..A_t.
Mat augmented_matrix(const MatrixFamily& family, int t);

/// Smallest t with rank(A^(t)) - rank(A^(t-1)) = n; 0 for a regular family.
/// Throws NotInvertibleFamilyError if none is found up to max_order.
int pole_order(const MatrixFamily& family, double rel_tol = 1e-10, int max_order = 8);

/// Laurent series G(theta) = P theta^{-s} sum_k theta^k X_k, with P = J when the prefactor flag is set.
struct LaurentExpansion {
    int pole_order = 0;
    std::vector<Mat> coeffs;
    bool includes_symplectic_prefactor = true;
    int truncation_order = 0;
};

/// Expansion of J A(theta)^{-1} around theta = 0 via augmented-matrix pseudoinverse blocks.
LaurentExpansion sm_expansion(const MatrixFamily& family, int r_max = 6, double rel_tol = 1e-10);

/// Regular case: G = J (theta n0 - H)^{-1} = -J H^{-1} sum_k theta^k (n0 H^{-1})^k.
/// Throws SingularMatrixError when H is singular.
LaurentExpansion neumann_expansion(const Mat& h, const Mat& n0, int order = 20);

/// Evaluates the expansion; throws PoleAtZeroError at theta = 0 with a pole.
Mat evaluate(const LaurentExpansion& exp, double theta);

/// J M^{-1}; throws SingularMatrixError when M is numerically singular.
Mat direct_response(const Mat& m);

struct InverseSeriesReport {
    bool applicable = false;       ///< n0 invertible
    bool terminates = false;       ///< H n0^{-1} nilpotent
    bool divergent = false;        ///< infinite series in 1/theta
    double spectral_radius = 0.0;  ///< of H n0^{-1}
    int terms_checked = 0;
};

/// Diagnoses the expansion (theta n0 - H)^{-1} = theta^{-1} n0^{-1} sum_k theta^{-k} (H n0^{-1})^k.
InverseSeriesReport inverse_series_diagnostic(const Mat& h, const Mat& n0, double tol = 1e-10);

/// k-th term n0^{-1} (H n0^{-1})^k of the inverse series.
Mat inverse_series_term(const Mat& h, const Mat& n0, int k);

}  // namespace singular_sense
