#include "singular_sense/fisher.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "singular_sense/errors.hpp"

namespace singular_sense {

const char* to_string(FisherKind k) {
    switch (k) {
        case FisherKind::Classical: return "classical";
        case FisherKind::QuantumExact: return "quantum_exact";
        case FisherKind::QuantumNoisy: return "quantum_noisy";
        case FisherKind::QuantumAsymptotic: return "quantum_asymptotic";
    }
    return "unknown";
}

namespace {

void check_derivatives(const Mat& cov, const std::vector<Vec>& dmean, const std::vector<Mat>& dcov) {
    if (dmean.size() != dcov.size())
        throw std::invalid_argument("need one mean derivative per covariance derivative");
    const Eigen::Index n = cov.rows();
    if (cov.cols() != n) throw std::invalid_argument("covariance must be square");
    for (std::size_t j = 0; j < dcov.size(); ++j) {
        if (dcov[j].rows() != n || dcov[j].cols() != n)
            throw std::invalid_argument("covariance derivative has the wrong shape");
        if (dmean[j].size() != n) throw std::invalid_argument("mean derivative has the wrong length");
    }
}

FisherMatrix gaussian_information(const Mat& cov, const std::vector<Vec>& dmean, const std::vector<Mat>& dcov,
                                  double mean_prefactor, FisherKind kind) {
    check_derivatives(cov, dmean, dcov);
    if (mean_prefactor < 0.0) throw std::invalid_argument("mean prefactor must be non-negative");
    const Eigen::Index n = cov.rows();
    const Eigen::Index m = static_cast<Eigen::Index>(dcov.size());
    Eigen::LLT<Mat> llt(0.5 * (cov + cov.transpose()));
    if (llt.info() != Eigen::Success) throw PhysicalityError("covariance is not positive definite");
    const auto lower = llt.matrixL();

    Mat factor(n * n + n, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const Mat half = lower.solve(dcov[static_cast<std::size_t>(j)]);
        const Mat whitened = lower.solve(half.transpose());
        factor.col(j).head(n * n) = Eigen::Map<const Vec>(whitened.data(), n * n) / std::sqrt(2.0);
        factor.col(j).tail(n) = std::sqrt(mean_prefactor) * lower.solve(dmean[static_cast<std::size_t>(j)]);
    }
    FisherMatrix f;
    f.kind = kind;
    f.gram = factor;
    f.entries = factor.transpose() * factor;
    return f;
}

Mat basis_block(int l) {
    Eigen::Matrix2d a;
    switch (l) {
        case 0: a << 0, 1, -1, 0; break;   // i sigma_y
        case 1: a << 1, 0, 0, -1; break;   // sigma_z
        case 2: a << 1, 0, 0, 1; break;    // identity
        default: a << 0, 1, 1, 0; break;   // sigma_x
    }
    return a / std::sqrt(2.0);
}

/// Basis element with block (a, b) = A_l in qpqp ordering, mapped to qq..pp ordering.
Mat basis_matrix(int n_modes, int a, int b, int l) {
    const Eigen::Matrix2d blk = basis_block(l);
    Mat out = Mat::Zero(2 * n_modes, 2 * n_modes);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) out(r * n_modes + a, c * n_modes + b) = blk(r, c);
    return out;
}

}  // namespace

FisherMatrix cfim_gaussian(const Mat& cov, const std::vector<Vec>& dmean, const std::vector<Mat>& dcov) {
    return gaussian_information(cov, dmean, dcov, 1.0, FisherKind::Classical);
}

FisherMatrix cfim_heterodyne(const GaussianState& state, const std::vector<Vec>& dmean,
                             const std::vector<Mat>& dcov) {
    const Mat c = state.cov + Mat::Identity(state.cov.rows(), state.cov.cols());
    return gaussian_information(c, dmean, dcov, 1.0, FisherKind::Classical);
}

FisherMatrix qfim_noisy(const GaussianState& state, const std::vector<Vec>& dmean, const std::vector<Mat>& dcov,
                        const FisherOptions& opts) {
    return gaussian_information(state.cov, dmean, dcov, opts.mean_prefactor, FisherKind::QuantumNoisy);
}

Mat sld_matrix(const Mat& v, const Mat& dv, double pure_guard) {
    if (dv.rows() != v.rows() || dv.cols() != v.cols())
        throw std::invalid_argument("sld_matrix: dV shape differs from V");
    const WilliamsonResult w = williamson(v);
    const int n = static_cast<int>(w.symplectic_eigenvalues.size());
    if (w.symplectic_eigenvalues.minCoeff() <= 1.0 + pure_guard)
        throw NearPureStateError("symplectic eigenvalue too close to 1 for the SLD formula");
    const Mat dinv = w.transform.inverse();
    const Mat dv_frame = dinv * dv * dinv.transpose();
    Mat l_frame = Mat::Zero(2 * n, 2 * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int l = 0; l < 4; ++l) {
                const Mat basis = basis_matrix(n, a, b, l);
                const double proj = (dv_frame.cwiseProduct(basis)).sum();
                const double sign = (l % 2 == 0) ? -1.0 : 1.0;
                const double denom = w.symplectic_eigenvalues(a) * w.symplectic_eigenvalues(b) + sign;
                l_frame += (proj / denom) * basis;
            }
    return dinv.transpose() * l_frame * dinv;
}

double sld_residual(const Mat& v, const Mat& dv, const Mat& l) {
    const Mat j = symplectic_form(static_cast<int>(v.rows() / 2));
    return (dv - (v * l * v + j * l * j)).norm() / dv.norm();
}

FisherMatrix qfim_exact(const GaussianState& state, const std::vector<Vec>& dmean, const std::vector<Mat>& dcov,
                        const FisherOptions& opts) {
    check_derivatives(state.cov, dmean, dcov);
    const std::size_t m = dcov.size();
    const Eigen::Index n = state.cov.rows();
    std::vector<Mat> sld;
    sld.reserve(m);
    for (const Mat& d : dcov) {
        if (d.norm() == 0.0)
            sld.push_back(Mat::Zero(n, n));
        else
            sld.push_back(sld_matrix(state.cov, d, opts.pure_guard));
    }
    Eigen::LLT<Mat> llt(state.cov);
    if (llt.info() != Eigen::Success) throw PhysicalityError("covariance is not positive definite");
    FisherMatrix f;
    f.kind = FisherKind::QuantumExact;
    f.entries = Mat::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < m; ++k) {
            const double mean_term = dmean[j].dot(llt.solve(dmean[k]));
            f.entries(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
                0.5 * (sld[j] * dcov[k]).trace() + opts.mean_prefactor * mean_term;
        }
    return f;
}

namespace {

struct AsymptoticTerms {
    Mat4 veff;
    Mat4 veff_inv;
    Vec4 s_in;
    double mean_weight;
};

AsymptoticTerms asymptotic_terms(const SensorParams& p, const InputSpec& in, const FisherOptions& opts) {
    AsymptoticTerms t;
    t.veff = effective_input_cov(p, in);
    t.veff_inv = t.veff.inverse();
    t.s_in = in.displacement;
    t.mean_weight = opts.mean_prefactor * p.kappa * p.kappa;
    return t;
}

double asymptotic_pair(const AsymptoticTerms& t, const Mat4& aj, const Mat4& ak) {
    const Vec4 uj = aj * t.s_in;
    const Vec4 uk = ak * t.s_in;
    return (aj * ak).trace() + (t.veff_inv * aj * t.veff * ak.transpose()).trace() +
           t.mean_weight * uj.dot(t.veff_inv * uk);
}

}  // namespace

FisherMatrix qfim_asymptotic(const LaurentExpansion& exp, const std::vector<Mat4>& n, const SensorParams& p,
                             const InputSpec& in, double theta0, const FisherOptions& opts) {
    if (exp.pole_order < 1)
        throw std::invalid_argument("qfim_asymptotic needs a pole (s >= 1); use the regular pipeline");
    const AsymptoticTerms t = asymptotic_terms(p, in, opts);
    const Mat4 g = evaluate(exp, theta0);
    const Mat4 j = symplectic_form4();
    std::vector<Mat4> a;
    for (const Mat4& ni : n) a.push_back(ni * j * g);
    const Eigen::Index m = static_cast<Eigen::Index>(n.size());
    FisherMatrix f;
    f.kind = FisherKind::QuantumAsymptotic;
    f.entries.resize(m, m);
    for (Eigen::Index r = 0; r < m; ++r)
        for (Eigen::Index c = 0; c < m; ++c)
            f.entries(r, c) = asymptotic_pair(t, a[static_cast<std::size_t>(r)], a[static_cast<std::size_t>(c)]);
    return f;
}

std::vector<std::vector<Vec>> qfim_asymptotic_series(const LaurentExpansion& exp, const std::vector<Mat4>& n,
                                                     const SensorParams& p, const InputSpec& in,
                                                     const FisherOptions& opts) {
    if (exp.pole_order < 1)
        throw std::invalid_argument("qfim_asymptotic_series needs a pole (s >= 1)");
    const AsymptoticTerms t = asymptotic_terms(p, in, opts);
    const Mat4 j = symplectic_form4();
    const Mat4 pre = exp.includes_symplectic_prefactor ? Mat4(j * j) : j;
    const std::size_t terms = exp.coeffs.size();
    // a[i][k] = n_i (J P) X_k, the theta^k coefficient of theta^s A_i
    std::vector<std::vector<Mat4>> a(n.size());
    for (std::size_t i = 0; i < n.size(); ++i)
        for (std::size_t k = 0; k < terms; ++k) a[i].push_back(n[i] * pre * exp.coeffs[k]);
    std::vector<std::vector<Vec>> series(n.size(), std::vector<Vec>(n.size()));
    for (std::size_t r = 0; r < n.size(); ++r)
        for (std::size_t c = 0; c < n.size(); ++c) {
            Vec s = Vec::Zero(static_cast<Eigen::Index>(2 * terms - 1));
            for (std::size_t x = 0; x < terms; ++x)
                for (std::size_t y = 0; y < terms; ++y)
                    s(static_cast<Eigen::Index>(x + y)) += asymptotic_pair(t, a[r][x], a[c][y]);
            series[r][c] = s;
        }
    return series;
}

ErrorBounds error_bounds(const FisherMatrix& f, int i) {
    const Eigen::Index m = f.size();
    if (i < 0 || i >= m) throw std::out_of_range("error_bounds: parameter index out of range");
    const double inf = std::numeric_limits<double>::infinity();
    ErrorBounds b;
    const double fii = f.entries(i, i);
    if (!(fii > 0.0)) {
        b.delta = inf;
        b.Delta = inf;
        return b;
    }
    b.delta = 1.0 / std::sqrt(fii);
    if (m == 1) {
        b.Delta = b.delta;
        return b;
    }
    if (f.has_gram()) {
        // [F^-1]_ii = 1 / |residual of column i after projecting out the others|^2
        Mat cols(f.gram.rows(), m);
        Eigen::Index c = 0;
        for (Eigen::Index k = 0; k < m; ++k)
            if (k != i) cols.col(c++) = f.gram.col(k);
        cols.col(m - 1) = f.gram.col(i);
        Eigen::HouseholderQR<Mat> qr(cols);
        const Mat r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
        const double last = std::abs(r(m - 1, m - 1));
        if (!(last > 1e-14 * f.gram.col(i).norm()))
            throw SingularMatrixError("Fisher matrix is singular; the nuisance bound is undefined");
        b.Delta = 1.0 / last;
        return b;
    }
    if (m == 2) {
        const int j = 1 - i;
        const double fjj = f.entries(j, j);
        const double fij = f.entries(i, j);
        const double schur = fii - fij * fij / fjj;
        if (!(fjj > 0.0) || !(schur > 0.0))
            throw SingularMatrixError("Fisher matrix is singular; the nuisance bound is undefined");
        b.Delta = 1.0 / std::sqrt(schur);
        return b;
    }
    Eigen::FullPivLU<Mat> lu(f.entries);
    if (!lu.isInvertible()) throw SingularMatrixError("Fisher matrix is singular; the nuisance bound is undefined");
    const double inv_ii = lu.inverse()(i, i);
    if (!(inv_ii > 0.0)) throw SingularMatrixError("Fisher matrix inverse is not positive");
    b.Delta = std::sqrt(inv_ii);
    return b;
}

Bounds bounds(const FisherMatrix& classical, const FisherMatrix& quantum, int i) {
    const ErrorBounds c = error_bounds(classical, i);
    const ErrorBounds q = error_bounds(quantum, i);
    return {c.delta, q.delta, c.Delta, q.Delta};
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::int64_t kChunk = 1 << 16;

}  // namespace

FisherMatrix gaussian_fisher_monte_carlo(const Mat& cov, const std::vector<Vec>& dmean,
                                         const std::vector<Mat>& dcov, std::int64_t n_samples,
                                         std::uint64_t seed) {
    check_derivatives(cov, dmean, dcov);
    if (n_samples < 100) throw std::invalid_argument("Monte Carlo estimate needs at least 100 samples");
    const Eigen::Index n = cov.rows();
    const std::size_t m = dcov.size();
    Eigen::LLT<Mat> llt(cov);
    if (llt.info() != Eigen::Success) throw PhysicalityError("covariance is not positive definite");
    const Mat lower = llt.matrixL();
    const Mat cinv = llt.solve(Mat::Identity(n, n));
    std::vector<Mat> quad(m);
    std::vector<Vec> lin(m);
    Vec traces(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
        quad[j] = cinv * dcov[j] * cinv;
        lin[j] = cinv * dmean[j];
        traces(static_cast<Eigen::Index>(j)) = (cinv * dcov[j]).trace();
    }

    Mat total = Mat::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    Vec z(n), score(static_cast<Eigen::Index>(m));
    const std::int64_t chunks = (n_samples + kChunk - 1) / kChunk;
    for (std::int64_t c = 0; c < chunks; ++c) {
        std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(c))));
        std::normal_distribution<double> normal;
        const std::int64_t count = std::min(kChunk, n_samples - c * kChunk);
        Mat chunk = Mat::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        for (std::int64_t s = 0; s < count; ++s) {
            for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
            const Vec y = lower * z;
            for (std::size_t j = 0; j < m; ++j)
                score(static_cast<Eigen::Index>(j)) =
                    0.5 * (y.dot(quad[j] * y) - traces(static_cast<Eigen::Index>(j))) + lin[j].dot(y);
            chunk.noalias() += score * score.transpose();
        }
        total += chunk;
    }
    FisherMatrix f;
    f.kind = FisherKind::Classical;
    f.entries = total / static_cast<double>(n_samples);
    return f;
}

FisherMatrix cfim_monte_carlo(const GaussianState& state, const std::vector<Vec>& dmean,
                              const std::vector<Mat>& dcov, std::int64_t n_samples, std::uint64_t seed) {
    const Mat c = state.cov + Mat::Identity(state.cov.rows(), state.cov.cols());
    return gaussian_fisher_monte_carlo(c, dmean, dcov, n_samples, seed);
}

}  // namespace singular_sense
