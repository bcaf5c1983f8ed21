// Dimension reduction against a fitted codebook: per-component local frames
// from the top-k covariance eigenvectors, the hard-partition encoder and
// reconstruction decoder, average squared-error distortion, and the
// Pinsker-based mismatch bound.

#pragma once

#include <cstddef>
#include <vector>

#include "geoquant/codebook.hpp"
#include "geoquant/types.hpp"

namespace geoquant {

struct ReducedPoint {
    int chart = 0;  // encoding component index
    Vec coords;     // coefficients in the chart's eigenbasis, length k
};

/// Per-component orthonormal frames (rows = top-k eigenvectors of K_m) and
/// means. k may equal n for testing; reduction then becomes lossless.
class ChartProjector {
public:
    ChartProjector(std::vector<Mat> frames, std::vector<Vec> means, int k);

    static ChartProjector from_codebook(const Codebook& cb, int k);

    int k() const { return k_; }
    int ambient_dim() const { return static_cast<int>(means_.front().size()); }
    std::size_t charts() const { return frames_.size(); }
    const Mat& frame(std::size_t m) const { return frames_.at(m); }
    const Vec& mean(std::size_t m) const { return means_.at(m); }

private:
    std::vector<Mat> frames_;  // k x n, orthonormal rows
    std::vector<Vec> means_;
    int k_ = 0;
};

/// Encoder: chart = argmin_m rho0(x, m), coords = frame * (x - mean).
ReducedPoint reduce(const Codebook& cb, const ChartProjector& proj, const Vec& x);

/// Decoder: mean_m + frame_m^t * u.
Vec reconstruct(const ChartProjector& proj, const ReducedPoint& p);

/// (1/N) sum_i |X_i - reconstruct(reduce(X_i))|^2.
double avg_reconstruction_distortion(const Codebook& cb, const ChartProjector& proj,
                                     const Mat& data);

/// A * sqrt(2 * (ibar - mu * phi_avg)). Throws if the radicand is negative
/// (inconsistent estimates) or A <= 0.
double pinsker_mismatch_bound(double ibar, double phi_avg, double mu,
                              double dist_bound_A);

} // namespace geoquant
