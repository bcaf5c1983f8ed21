// Multivariate Gaussian models and the dense linear algebra shared by the
// rest of the library: log-densities, closed-form relative entropy, cached
// Cholesky and spectral decompositions, covariance flooring, sampling.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "geoquant/types.hpp"

namespace geoquant {

// Covariance candidate failed the positive-definiteness check.
class NotPositiveDefinite : public std::runtime_error {
public:
    NotPositiveDefinite(double smallest, const std::string& msg)
        : std::runtime_error(msg), smallest_eigenvalue(smallest) {}

    double smallest_eigenvalue;
};

/// Immutable n-dimensional Gaussian N(mean, cov).
///
/// Construction validates symmetry (1e-12 relative) and positive
/// definiteness, then caches the lower Cholesky factor, log det cov and a
/// full symmetric eigendecomposition with eigenvalues sorted descending.
/// Eigenvector signs are fixed (first non-negligible component positive) so
/// serialized models are reproducible. Safe to share across threads.
class GaussianModel {
public:
    GaussianModel(Vec mean, Mat cov);

    int dim() const { return static_cast<int>(mean_.size()); }
    const Vec& mean() const { return mean_; }
    const Mat& cov() const { return cov_; }
    const Mat& chol_lower() const { return chol_lower_; }
    double log_det_cov() const { return log_det_cov_; }
    const Vec& eigenvalues() const { return eigvals_; }   // descending
    const Mat& eigenvectors() const { return eigvecs_; }  // columns, matching order

    /// ln N(x; mean, cov), including the (n/2) ln(2*pi) constant.
    double log_density(const Vec& x) const;

    /// x^t K^{-1} x via the cached Cholesky factor.
    double quad_form_inv(const Vec& x) const;

    /// Deterministic sampling: count rows of N(mean, cov) draws.
    Mat sample(int count, std::uint64_t seed) const;

private:
    Vec mean_;
    Mat cov_;
    Mat chol_lower_;
    double log_det_cov_ = 0.0;
    Vec eigvals_;
    Mat eigvecs_;
};

/// D(g_from || g_to) for Gaussians, closed form:
///   0.5 * (ln det(K_from^{-1} K_to) + tr(K_to^{-1} K_from)
///          + (mu_to - mu_from)^t K_to^{-1} (mu_to - mu_from) - n)
/// Clamped at zero against rounding; throws on dimension mismatch.
double kl_gaussian(const GaussianModel& g_from, const GaussianModel& g_to);

/// cov + eps*I with eps = max(floor_ratio * tr(cov)/n, abs_floor).
/// Total on symmetric input; makes rank-deficient scatter matrices usable
/// as Gaussian covariances.
Mat regularize_cov(const Mat& cov, double floor_ratio, double abs_floor = 1e-12);

} // namespace geoquant
