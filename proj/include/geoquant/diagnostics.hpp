// Known-density diagnostics: seeded Monte-Carlo divergence and L1
// estimators, the partition-weighted objective estimate, the index of
// resolvability, finite-sample loss bounds, and the consistency sweep
// harness.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "geoquant/codebook.hpp"
#include "geoquant/lloyd.hpp"
#include "geoquant/synth.hpp"
#include "geoquant/types.hpp"

namespace geoquant {

using LogDensityFn = std::function<double(const Vec&)>;
using SamplerFn = std::function<Mat(int count, std::uint64_t seed)>;

struct MCEstimate {
    double value = 0.0;
    double std_error = 0.0;
    int n_samples = 0;
    std::uint64_t seed = 0;
};

/// (1/n) sum [ln f(X_i) - ln g(X_i)] with X_i ~ f. Throws on a non-finite
/// log ratio, naming the offending sample.
MCEstimate mc_kl(const LogDensityFn& log_f, const SamplerFn& sample_f,
                 const LogDensityFn& log_g, int n, std::uint64_t seed);

/// Importance-sampled estimate of the L1 distance integral |f - g| using the
/// balanced mixture proposal (f + g)/2, sampled as two equal strata.
MCEstimate mc_l1(const LogDensityFn& log_f, const SamplerFn& sample_f,
                 const LogDensityFn& log_g, const SamplerFn& sample_g, int n,
                 std::uint64_t seed);

/// Plug-in estimate of the partition-weighted objective: cell probabilities
/// by frequency, within-cell divergences by averaged log ratios, plus the
/// weighted complexity term. Empty cells are skipped with a warning on
/// stderr.
double ibar_estimate(const Codebook& cb, const std::vector<int>& assignments,
                     const LogDensityFn& log_f_star, const Mat& data);

struct ResolvabilityReport {
    std::vector<double> divergence;     // d_m = MC estimate of D(f* || g_m)
    std::vector<double> divergence_se;  // std errors of d_m
    std::vector<double> composite_length;  // L_m = phi(m) - ln p_m
    std::vector<double> term;           // d_m + mu * L_m / N
    double r_index = 0.0;               // min_m term
    std::size_t argmin = 0;
    long n_train = 0;
};

/// Index of resolvability with per-component terms; KL terms by mc_kl with
/// per-component derived seeds.
ResolvabilityReport resolvability(const Codebook& cb, const LogDensityFn& log_f_star,
                                  const SamplerFn& sample_f_star, long n_train,
                                  int mc_n, std::uint64_t seed);

struct Theorem1Bounds {
    double alpha = 0.0;
    double prob_bound = 0.0;  // high-probability loss bound
    double exp_bound = 0.0;   // expected-loss bound
};

/// Finite-sample loss bounds with alpha = M_fstar / (2 * (mu - h)). Requires
/// mu > h + M_fstar / 2 (throws naming the violated inequality) and
/// 0 < delta < 1.
Theorem1Bounds theorem1_bound(double r_index, int codebook_size, double mu, double h,
                              double M_fstar, long n_train, double delta);

/// Advisory empirical moments of U_m = ln g_m(X) - ln f*(X) under f*; not a
/// verification of any hypothesis.
struct BernsteinAdvisory {
    std::vector<double> mean_u;
    std::vector<double> var_u;
    double m_candidate = 0.0;  // max_m var(U_m) / KL_m estimate
};

BernsteinAdvisory bernstein_advisory(const Codebook& cb, const LogDensityFn& log_f_star,
                                     const SamplerFn& sample_f_star, int n,
                                     std::uint64_t seed);

struct SweepRow {
    int n_samples = 0;
    std::uint64_t seed = 0;
    int m_init = 0;
    int m_final = 0;
    MCEstimate kl;      // D(f* || fitted mixture)
    double r_index = 0.0;
    double max_composite_length = 0.0;  // max_m L(g_m)
};

/// For each training size in the increasing grid and each seed: draw a fresh
/// sample, fit with m_init = ceil(sqrt(N)) capped at m_init_cap, and report
/// the mixture divergence, resolvability index and worst composite length.
/// Rows are ordered by (grid position, seed position).
std::vector<SweepRow> consistency_sweep(const FitConfig& cfg_template,
                                        const EmbeddingSpec& f_star,
                                        const std::vector<int>& n_grid,
                                        const std::vector<std::uint64_t>& seeds,
                                        int mc_n, int m_init_cap = 128);

/// Median of per-seed KL values for one grid point of sweep rows.
double sweep_median_kl(const std::vector<SweepRow>& rows, int n_samples);

} // namespace geoquant
