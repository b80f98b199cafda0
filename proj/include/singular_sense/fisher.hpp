#pragma once

#include <cstdint>
#include <vector>

#include "singular_sense/channel.hpp"
#include "singular_sense/expansion.hpp"
#include "singular_sense/linalg.hpp"

namespace singular_sense {

enum class FisherKind { Classical, QuantumExact, QuantumNoisy, QuantumAsymptotic };

const char* to_string(FisherKind k);

struct FisherMatrix {
    Mat entries;
    FisherKind kind = FisherKind::Classical;
    /// Optional factor R with entries = R^T R; lets bounds() avoid cancellation in F^{-1}.
    Mat gram;

    bool has_gram() const { return gram.size() > 0; }
    Eigen::Index size() const { return entries.rows(); }
};

struct FisherOptions {
    /// Coefficient of the displacement term in the quantum information matrices.
    double mean_prefactor = 1.0;
    /// Symplectic eigenvalues below 1 + pure_guard are rejected by the SLD route.
    double pure_guard = 1e-6;
};

/// Gaussian likelihood information 1/2 Tr[C^-1 dC_j C^-1 dC_k] + dm_j^T C^-1 dm_k.
FisherMatrix cfim_gaussian(const Mat& cov, const std::vector<Vec>& dmean, const std::vector<Mat>& dcov);

/// Heterodyne detection: Gaussian likelihood with C = V + I.
FisherMatrix cfim_heterodyne(const GaussianState& state, const std::vector<Vec>& dmean,
                             const std::vector<Mat>& dcov);

/// Leading term of the Gaussian QFIM: the Gaussian formula evaluated on V itself.
FisherMatrix qfim_noisy(const GaussianState& state, const std::vector<Vec>& dmean,
                        const std::vector<Mat>& dcov, const FisherOptions& opts = {});

/// Symmetric logarithmic derivative solving dV = V L V + J L J, built in the Williamson frame.
Mat sld_matrix(const Mat& v, const Mat& dv, double pure_guard = 1e-6);

/// Relative residual ||dV - (V L V + J L J)||_F / ||dV||_F.
double sld_residual(const Mat& v, const Mat& dv, const Mat& l);

/// Exact Gaussian QFIM 1/2 Tr[L_j dV_k] + c dS_j^T V^-1 dS_k.
FisherMatrix qfim_exact(const GaussianState& state, const std::vector<Vec>& dmean,
                        const std::vector<Mat>& dcov, const FisherOptions& opts = {});

/// QFIM of the dominant-response state V ~ G V_eff G^T with G from the expansion at theta0:
/// Tr[A_j A_k] + Tr[V_eff^-1 A_j V_eff A_k^T] + c kappa^2 S^T A_j^T V_eff^-1 A_k S with A_j = n_j J G.
FisherMatrix qfim_asymptotic(const LaurentExpansion& exp, const std::vector<Mat4>& n, const SensorParams& p,
                             const InputSpec& in, double theta0, const FisherOptions& opts = {});

/// Power-series view of qfim_asymptotic: F_jk(theta0) = theta0^{-2s} sum_q c_q theta0^q.
/// Returned as series[j][k][q].
std::vector<std::vector<Vec>> qfim_asymptotic_series(const LaurentExpansion& exp, const std::vector<Mat4>& n,
                                                     const SensorParams& p, const InputSpec& in,
                                                     const FisherOptions& opts = {});

struct ErrorBounds {
    double delta = 0.0;  ///< 1/sqrt(F_ii), other parameters known
    double Delta = 0.0;  ///< sqrt([F^-1]_ii), other parameters unknown
};

/// Throws SingularMatrixError when F (or its factor) is singular for the nuisance bound.
ErrorBounds error_bounds(const FisherMatrix& f, int i);

struct Bounds {
    double delta_c = 0.0;
    double delta_q = 0.0;
    double Delta_c = 0.0;
    double Delta_q = 0.0;
};

Bounds bounds(const FisherMatrix& classical, const FisherMatrix& quantum, int i);

/// Score outer-product estimate of the Gaussian likelihood information with covariance C.
/// Samples are drawn in fixed-size chunks, each with its own seed derived from (seed, chunk).
FisherMatrix gaussian_fisher_monte_carlo(const Mat& cov, const std::vector<Vec>& dmean,
                                         const std::vector<Mat>& dcov, std::int64_t n_samples,
                                         std::uint64_t seed);

/// Monte Carlo estimate of cfim_heterodyne; n_samples must be at least 100.
FisherMatrix cfim_monte_carlo(const GaussianState& state, const std::vector<Vec>& dmean,
                              const std::vector<Mat>& dcov, std::int64_t n_samples, std::uint64_t seed);

}  // namespace singular_sense
