// Ground-truth generative model (latent chart index L, latent coordinate
// Y ~ N(0, I_k), observed X ~ N(mu_l + A_l y, Sigma_l)) for synthetic data
// and exact density evaluation in diagnostics.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoquant/gaussian_model.hpp"
#include "geoquant/types.hpp"

namespace geoquant {

/// Mixture of linearly embedded latent Gaussians. The marginal of X is
/// sum_l w_l N(x; mu_l, A_l A_l^t + Sigma_l); the effective per-chart
/// Gaussians are validated and cached on construction.
class EmbeddingSpec {
public:
    struct Chart {
        double weight = 1.0;  // w_l, positive, sums to 1
        Vec mu;               // length n
        Mat A;                // n x k
        Mat Sigma;            // n x n SPD
    };

    EmbeddingSpec(std::vector<Chart> charts, int n, int k);

    int n() const { return n_; }
    int k() const { return k_; }
    std::size_t chart_count() const { return charts_.size(); }
    const Chart& chart(std::size_t l) const { return charts_.at(l); }
    const std::vector<Chart>& charts() const { return charts_; }

    /// Effective marginal Gaussian of chart l: N(mu_l, A_l A_l^t + Sigma_l).
    const GaussianModel& effective(std::size_t l) const { return effective_.at(l); }

private:
    std::vector<Chart> charts_;
    std::vector<GaussianModel> effective_;
    int n_ = 0;
    int k_ = 0;
};

struct Dataset {
    Mat points;             // N x n
    bool has_latents = false;
    Eigen::VectorXi labels; // chart index per sample, when synthetic
    Mat latents;            // N x k latent coordinates, when synthetic
};

/// Draw N samples through the generative chain; deterministic per seed.
Dataset sample_embedding(const EmbeddingSpec& spec, int count, std::uint64_t seed);

/// ln f_X(x) via log-sum-exp over the chart marginals.
double true_log_density(const EmbeddingSpec& spec, const Vec& x);

/// Fixed regression fixtures: "two-charts-2d", "arc-3d-k1", "clusters-5d-k2".
/// The first two are fully deterministic and ignore the seed; the cluster
/// fixture draws its frames from the seed.
EmbeddingSpec builtin_fixture(const std::string& name, std::uint64_t seed = 1);

/// Names accepted by builtin_fixture.
const std::vector<std::string>& builtin_fixture_names();

} // namespace geoquant
