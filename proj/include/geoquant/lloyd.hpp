// Empirical Lloyd descent: seeding, minimum-distortion encoding, the
// frozen-kernel centroid update, optimal lengths, and the outer fit loop.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "geoquant/codebook.hpp"
#include "geoquant/types.hpp"

namespace geoquant {

enum class InitScheme { FarthestPoint, RandomSubset };

struct FitConfig {
    int m_init = 0;                    // 0 -> min(32, max(1, N/10))
    double mu = 0.0;                   // complexity trade-off, >= 0
    std::optional<KernelSpec> kernel;  // empty -> Gaussian, sigma = diameter/sqrt(m_init)
    double epsilon = 1e-4;             // relative-improvement stop threshold
    int max_iter = 200;
    std::uint64_t seed = 1;
    double cov_floor_ratio = 1e-6;
    double cov_abs_floor = 1e-12;
    InitScheme init_scheme = InitScheme::FarthestPoint;
    int threads = 1;
    bool record_step_checks = false;   // per-step monotonicity diagnostics
};

struct EncodeResult {
    std::vector<int> assignments;  // per sample, argmin_m rho0
    std::vector<int> counts;       // per component
};

// Per-iteration monotonicity diagnostics (recorded on demand).
struct StepCheck {
    bool has_encode_check = false;
    double d_prev_assign = 0.0;        // avg rho0, previous assignments
    double d_new_assign = 0.0;         // avg rho0, fresh assignments, same codebook
    double surrogate_increase_max = 0.0;  // max over cells of F(new) - F(old)
    double d_before_lengths = 0.0;
    double d_after_lengths = 0.0;
    double kraft_after_lengths = 0.0;  // sum exp(-l_m) after the length update
};

struct FitReport {
    std::vector<double> distortion_trace;  // D_0 .. D_r (average rho0)
    int iterations = 0;
    Codebook final_codebook;
    std::vector<int> assignments;
    std::vector<int> counts;
    int removed_cells = 0;
    std::vector<StepCheck> step_checks;
};

/// Fill in data-dependent defaults (m_init, kernel sigma) for a dataset of
/// N rows. Exposed so callers can inspect the resolved configuration.
FitConfig resolve_defaults(const FitConfig& cfg, const Mat& data);

/// Seed a codebook: means by farthest-point or random-subset selection,
/// every covariance equal to the regularized global data covariance,
/// uniform weights 1/m and lengths ln m.
Codebook initialize(const Mat& data, const FitConfig& cfg);

/// Map every sample to its minimum-rho0 component; ties break toward the
/// smallest index. Thread count never changes the result.
EncodeResult encode_step(const Codebook& cb, const Mat& data, int threads = 1);

/// Frozen-kernel centroid update. With weights lam_{m'} = mu * kappa_old(m, m')
/// and T = 1 + sum lam, each cell's new model is the Gaussian matching the
/// mean and covariance of the mixture of the empirical cell measure
/// (weight 1/T) and the old neighbor models (weights lam/T); this is the
/// exact minimizer of the frozen surrogate objective. Covariances pass
/// through regularize_cov. Throws on an empty cell.
Codebook centroid_step(const Codebook& cb, const Mat& data,
                       const std::vector<int>& assignments,
                       double cov_floor_ratio = 1e-6, double cov_abs_floor = 1e-12);

/// Frozen surrogate objective of cell m evaluated at a candidate model:
///   (1/N_m) sum_{i in cell} -ln g(X_i)
///   + mu * sum_{m' != m} kappa_old(m, m') D(g_old_m' || g).
double frozen_cell_surrogate(const Codebook& cb_old, std::size_t m,
                             const GaussianModel& candidate, const Mat& data,
                             const std::vector<int>& assignments);

/// (1/N) sum_i rho0(X_i, assignments_i).
double average_distortion(const Codebook& cb, const Mat& data,
                          const std::vector<int>& assignments);

/// Full descent loop: initialize, then iterate encode / empty-cell removal /
/// centroid / length update, tracking the average rho0 distortion D_r.
/// Stops when the relative improvement (absolute when D_{r-1} <= 0) drops
/// below epsilon or max_iter is reached. Deterministic given the seed.
FitReport fit(const Mat& data, const FitConfig& cfg);

} // namespace geoquant
