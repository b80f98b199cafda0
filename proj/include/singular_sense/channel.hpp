#pragma once

#include <optional>
#include <vector>

#include "singular_sense/linalg.hpp"
#include "singular_sense/sensor.hpp"

namespace singular_sense {

using Mat8 = Eigen::Matrix<double, 8, 8>;
using Mat48 = Eigen::Matrix<double, 4, 8>;

struct GaussianState {
    Vec mean;
    Mat cov;
};

/// Thermal probe (n_A) and scattering (n_B) inputs; the probe may carry a displacement.
struct InputSpec {
    double n_A = 1.0;
    double n_B = 1.0;
    Vec4 displacement = Vec4::Zero();
    std::optional<Mat8> scatter_cov_override;
};

struct ThermalInputs {
    GaussianState probe;   ///< (displacement, (1 + 2 n_A) I4)
    Mat8 scatter_cov;      ///< (1 + 2 n_B) I8 unless overridden
};

ThermalInputs thermal_input(const InputSpec& spec);

/// Coupling (K_B1 | K_B2) with K_B1 = diag(sqrt eta1, 0, sqrt eta1, 0), K_B2 = diag(0, -sqrt eta2, 0, sqrt eta2).
Mat48 xi_matrix(const SensorParams& p);

/// kappa^2 V_A + kappa Xi V_B Xi^T, the input covariance seen through a dominant response.
Mat4 effective_input_cov(const SensorParams& p, const InputSpec& in);

/// Output probe moments: mean (I - kappa G) S_in, cov (I - kappa G) V_A (...)^T + kappa G Xi V_B Xi^T G^T.
GaussianState output_state(const Mat4& g, const SensorParams& p, const InputSpec& in);

/// dG/dtheta for M(theta) containing theta * n: G n J G.
Mat4 response_derivative(const Mat4& g, const Mat4& n);

enum class DerivativeMode { Exact, GDominant };

struct OutputDerivatives {
    std::vector<Vec> dmean;
    std::vector<Mat> dcov;
};

OutputDerivatives output_derivatives(const Mat4& g, const std::vector<Mat4>& dg, const SensorParams& p,
                                     const InputSpec& in, DerivativeMode mode = DerivativeMode::Exact);

/// Covariance V ~ G V_eff G^T and mean -kappa G S_in kept by the dominant-response approximation.
GaussianState g_dominant_state(const Mat4& g, const SensorParams& p, const InputSpec& in);

/// Output moments written in the coordinates y = G^{-1} x, where G = J M^{-1}.
/// With T = G^{-1} = -M J the covariance is V = G cov G^T, dV_j = G dcov_j G^T and
/// dS_j = G dmean_j. Fisher information is unchanged by this congruence, and the frame
/// quantities stay well conditioned as M approaches a singular point.
struct ResponseFrame {
    Mat4 response;        ///< G
    Mat4 inverse_response;  ///< T
    Vec4 mean;
    Mat4 cov;
    Mat4 heterodyne_cov;  ///< frame image of V + I
    std::vector<Vec> dmean;
    std::vector<Mat> dcov;
};

/// n holds the phase-space perturbation matrices entering M linearly.
ResponseFrame response_frame(const Mat4& m, const std::vector<Mat4>& n, const SensorParams& p,
                             const InputSpec& in);

/// Smallest eigenvalue of V + iJ evaluated in the response frame, scaled to the frame norm.
double frame_uncertainty_margin(const ResponseFrame& f);

/// Physical iff every symplectic eigenvalue is at least 1 - tol.
bool is_physical(const Mat& cov, double tol = 1e-9);

}  // namespace singular_sense
