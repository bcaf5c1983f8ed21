// Chart atlas over a fitted codebook, the smooth partition of unity built
// from compactly supported bumps, and the glued Riemannian metric on
// dimension-reduced coordinates.

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "geoquant/codebook.hpp"
#include "geoquant/types.hpp"

namespace geoquant {

/// One chart per mixture component: image ball radius r_m = sqrt(largest
/// eigenvalue of K_m), bump shell width delta in (0, r_m), orthonormal
/// frame rows (top-k eigenvectors) and offset = frame * mean.
class ChartAtlas {
public:
    struct Chart {
        double radius = 1.0;
        double delta = 0.1;
        Mat frame;   // k x n
        Vec offset;  // length k
        double weight = 0.0;
    };

    ChartAtlas(std::vector<Chart> charts, int k);

    int k() const { return k_; }
    std::size_t size() const { return charts_.size(); }
    const Chart& chart(std::size_t m) const { return charts_.at(m); }

private:
    std::vector<Chart> charts_;
    int k_ = 0;
};

struct PartitionWeights {
    Vec eta;              // per chart, in [0,1]; sums to 1 when defined
    bool defined = true;  // false when every bump vanishes
};

struct MetricValue {
    Mat form;             // k x k symmetric, PSD when defined
    bool defined = true;
};

/// Build the atlas from a fitted codebook; k must be < n and
/// 0 < delta_ratio < 1 (delta = delta_ratio * r_m per chart).
ChartAtlas build_atlas(const Codebook& cb, int k, double delta_ratio = 0.1);

/// Partition of unity at a point u of the reduced space:
///   eta_m(u) = p_m psi_m(|u - offset_m|) / sum_m' p_m' psi_m'(|u - offset_m'|)
/// with psi_m the bump of plateau r_m - delta_m and support r_m. A zero
/// denominator is reported as defined = false with all weights zero.
PartitionWeights partition_weights(const ChartAtlas& atlas, const Vec& u);

/// Chart activations for a metric query at local coordinates y: each bump is
/// evaluated at its own shifted point y + offset_m, i.e. at radius |y|, and
/// the weights are normalized across charts.
PartitionWeights metric_weights(const ChartAtlas& atlas, const Vec& y);

/// Chart whose activation is largest at y (ties toward the smallest index);
/// used as the default reference frame for metric queries.
std::size_t default_reference_chart(const ChartAtlas& atlas, const Vec& y);

/// Glued metric G(y) = sum_m eta_m * G_m where G_m expresses the alignment
/// of chart m's frame with the reference chart's frame: G_m = R^t R with
/// R = frame_ref * frame_m^t (identity for the reference chart itself),
/// nudged by eps_pd * I whenever its smallest eigenvalue falls below eps_pd.
MetricValue metric_matrix(const ChartAtlas& atlas, const Vec& y,
                          std::optional<std::size_t> reference_chart = std::nullopt,
                          double eps_pd = 1e-10);

/// g_y(u, u2) = u^t G(y) u2; zero when the metric is undefined at y.
double metric(const ChartAtlas& atlas, const Vec& y, const Vec& u, const Vec& u2,
              std::optional<std::size_t> reference_chart = std::nullopt);

/// Finite-difference variation |G(y + h*dir) - G(y)|_max / h. Throws if the
/// metric is undefined at either endpoint.
double metric_smoothness_probe(const ChartAtlas& atlas, const Vec& y,
                               const Vec& direction, double h,
                               std::optional<std::size_t> reference_chart = std::nullopt);

} // namespace geoquant
