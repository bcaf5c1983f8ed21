// Codebook of Gaussian components with per-component weights and idealized
// codelengths, the kernel-weighted pairwise complexity functional, and the
// encoder-side distortions.

#pragma once

#include <cstddef>
#include <vector>

#include "geoquant/gaussian_model.hpp"
#include "geoquant/kernels.hpp"
#include "geoquant/types.hpp"

namespace geoquant {

struct Component {
    GaussianModel model;
    double weight = 0.0;  // p_m, sums to 1 over the codebook
    double length = 0.0;  // l_m in nats, >= 0
};

/// Indexed set of Gaussian components plus the kernel and trade-off
/// parameter mu. Construction validates weight normalization and the Kraft
/// inequality sum(exp(-l_m)) <= 1, and caches the pairwise kernel matrix
/// (zero diagonal) together with the per-component complexity
///   phi(m) = sum_{m' != m} kappa(mean_m, mean_m') * D(g_m' || g_m).
/// Immutable between fitting steps; all queries are const and thread-safe.
class Codebook {
public:
    Codebook(std::vector<Component> components, KernelSpec kernel, double mu);

    std::size_t size() const { return components_.size(); }
    int dim() const { return components_.front().model.dim(); }
    const Component& component(std::size_t m) const { return components_.at(m); }
    const std::vector<Component>& components() const { return components_; }
    const KernelSpec& kernel() const { return kernel_; }
    double mu() const { return mu_; }

    /// Cached pairwise kernel weights kappa(mean_m, mean_m'), zero diagonal.
    const Mat& kernel_weights() const { return kappa_; }

    /// Cached complexity phi(m) >= 0.
    double complexity_phi(std::size_t m) const { return phi_(static_cast<Eigen::Index>(check_index(m))); }

    /// Encoder distortion: -ln g_m(x) + l_m + mu * phi(m).
    double rho0(const Vec& x, std::size_t m) const;

    /// Full distortion: ln f(x) + rho0(x, m); log_f supplied by the caller.
    /// May be negative.
    double rho(const Vec& x, std::size_t m, double log_f) const;

    /// ln sum_m p_m g_m(x), evaluated by log-sum-exp.
    double mixture_log_density(const Vec& x) const;

    /// sum_m p_m * phi(m).
    double weighted_phi() const;

private:
    std::size_t check_index(std::size_t m) const;
    void rebuild_cache();

    std::vector<Component> components_;
    KernelSpec kernel_;
    double mu_ = 0.0;
    Mat kappa_;
    Vec phi_;
    Vec rho0_const_;  // 0.5*(n ln 2pi + log det K_m) + l_m + mu*phi(m)
};

/// Optimal length function l_m = -ln p_m. Requires every weight > 0;
/// afterwards the Kraft sum equals 1 up to rounding.
Codebook length_update(const Codebook& cb);

/// Drop components whose encode count is zero, compact indices, and set the
/// surviving weights to their count fractions. Throws if every count is zero.
Codebook remove_empty(const Codebook& cb, const std::vector<int>& counts);

} // namespace geoquant
