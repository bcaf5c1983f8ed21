#include "geoquant/manifold.hpp"

#include <cmath>

namespace geoquant {

namespace {

// Shared normalization for both weight flavors; distances[m] is the radius
// at which chart m's bump is evaluated.
PartitionWeights weights_from_distances(const ChartAtlas& atlas, const Vec& distances) {
    const auto M = static_cast<Eigen::Index>(atlas.size());
    Vec act(M);
    for (Eigen::Index m = 0; m < M; ++m) {
        const auto& c = atlas.chart(static_cast<std::size_t>(m));
        const BumpProfile psi(c.radius - c.delta, c.radius);
        act(m) = c.weight * bump_eval(psi, distances(m));
    }
    PartitionWeights w;
    const double total = act.sum();
    if (total <= 0.0) {
        w.eta = Vec::Zero(M);
        w.defined = false;
        return w;
    }
    w.eta = act / total;
    w.defined = true;
    return w;
}

Vec point_distances(const ChartAtlas& atlas, const Vec& u) {
    const auto M = static_cast<Eigen::Index>(atlas.size());
    Vec d(M);
    for (Eigen::Index m = 0; m < M; ++m) {
        d(m) = (u - atlas.chart(static_cast<std::size_t>(m)).offset).norm();
    }
    return d;
}

void check_query_dim(const ChartAtlas& atlas, const Vec& v, const char* who) {
    if (v.size() != atlas.k()) {
        throw std::invalid_argument(std::string(who) + ": dimension mismatch");
    }
}

} // namespace

ChartAtlas::ChartAtlas(std::vector<Chart> charts, int k) : charts_(std::move(charts)), k_(k) {
    if (charts_.empty()) throw std::invalid_argument("ChartAtlas: no charts");
    if (k_ < 1) throw std::invalid_argument("ChartAtlas: k must be >= 1");
    for (const auto& c : charts_) {
        if (!(c.radius > 0.0) || !(c.delta > 0.0) || !(c.delta < c.radius)) {
            throw std::invalid_argument("ChartAtlas: need 0 < delta < radius");
        }
        if (c.frame.rows() != k_ || c.offset.size() != k_) {
            throw std::invalid_argument("ChartAtlas: chart dimension mismatch");
        }
        const Mat gram = c.frame * c.frame.transpose();
        if ((gram - Mat::Identity(k_, k_)).cwiseAbs().maxCoeff() > 1e-9) {
            throw std::invalid_argument("ChartAtlas: frame rows not orthonormal");
        }
    }
}

ChartAtlas build_atlas(const Codebook& cb, int k, double delta_ratio) {
    if (k >= cb.dim()) {
        throw std::invalid_argument("build_atlas: k must be < ambient dimension");
    }
    if (!(delta_ratio > 0.0) || !(delta_ratio < 1.0)) {
        throw std::invalid_argument("build_atlas: delta_ratio must be in (0,1)");
    }
    std::vector<ChartAtlas::Chart> charts;
    charts.reserve(cb.size());
    for (std::size_t m = 0; m < cb.size(); ++m) {
        const auto& comp = cb.component(m);
        ChartAtlas::Chart c;
        c.radius = std::sqrt(comp.model.eigenvalues()(0));
        c.delta = delta_ratio * c.radius;
        c.frame = comp.model.eigenvectors().leftCols(k).transpose();
        c.offset = c.frame * comp.model.mean();
        c.weight = comp.weight;
        charts.push_back(std::move(c));
    }
    return ChartAtlas(std::move(charts), k);
}

PartitionWeights partition_weights(const ChartAtlas& atlas, const Vec& u) {
    check_query_dim(atlas, u, "partition_weights");
    return weights_from_distances(atlas, point_distances(atlas, u));
}

PartitionWeights metric_weights(const ChartAtlas& atlas, const Vec& y) {
    check_query_dim(atlas, y, "metric_weights");
    // Every chart sees the query at its own shifted point y + offset_m,
    // which sits at radius |y| from that chart's bump center.
    return weights_from_distances(
        atlas, Vec::Constant(static_cast<Eigen::Index>(atlas.size()), y.norm()));
}

std::size_t default_reference_chart(const ChartAtlas& atlas, const Vec& y) {
    const PartitionWeights w = metric_weights(atlas, y);
    Eigen::Index best = 0;
    for (Eigen::Index m = 1; m < w.eta.size(); ++m) {
        if (w.eta(m) > w.eta(best)) best = m;
    }
    return static_cast<std::size_t>(best);
}

MetricValue metric_matrix(const ChartAtlas& atlas, const Vec& y,
                          std::optional<std::size_t> reference_chart, double eps_pd) {
    check_query_dim(atlas, y, "metric_matrix");
    const int k = atlas.k();
    MetricValue out;
    const PartitionWeights w = metric_weights(atlas, y);
    if (!w.defined) {
        out.form = Mat::Zero(k, k);
        out.defined = false;
        return out;
    }
    const std::size_t ref = reference_chart.value_or(default_reference_chart(atlas, y));
    if (ref >= atlas.size()) {
        throw std::invalid_argument("metric_matrix: reference chart out of range");
    }
    const Mat& frame_ref = atlas.chart(ref).frame;

    Mat G = Mat::Zero(k, k);
    for (std::size_t m = 0; m < atlas.size(); ++m) {
        const double eta = w.eta(static_cast<Eigen::Index>(m));
        if (eta == 0.0) continue;
        if (m == ref) {
            G += eta * Mat::Identity(k, k);
            continue;
        }
        const Mat R = frame_ref * atlas.chart(m).frame.transpose();
        Mat Gm = R.transpose() * R;
        Gm = 0.5 * (Gm + Gm.transpose());
        Eigen::SelfAdjointEigenSolver<Mat> eig(Gm);
        if (eig.eigenvalues()(0) < eps_pd) {
            Gm += eps_pd * Mat::Identity(k, k);
        }
        G += eta * Gm;
    }
    out.form = 0.5 * (G + G.transpose());
    out.defined = true;
    return out;
}

double metric(const ChartAtlas& atlas, const Vec& y, const Vec& u, const Vec& u2,
              std::optional<std::size_t> reference_chart) {
    check_query_dim(atlas, u, "metric");
    check_query_dim(atlas, u2, "metric");
    const MetricValue g = metric_matrix(atlas, y, reference_chart);
    return u.dot(g.form * u2);
}

double metric_smoothness_probe(const ChartAtlas& atlas, const Vec& y,
                               const Vec& direction, double h,
                               std::optional<std::size_t> reference_chart) {
    if (!(h > 0.0)) throw std::invalid_argument("metric_smoothness_probe: h must be > 0");
    check_query_dim(atlas, direction, "metric_smoothness_probe");
    // resolve the reference frame once so the difference reflects the metric,
    // not a switch of comparison chart between the two endpoints
    const std::size_t ref = reference_chart.value_or(default_reference_chart(atlas, y));
    const MetricValue a = metric_matrix(atlas, y, ref);
    const MetricValue b = metric_matrix(atlas, y + h * direction, ref);
    if (!a.defined || !b.defined) {
        throw std::invalid_argument("metric_smoothness_probe: metric undefined at a probe point");
    }
    return (b.form - a.form).cwiseAbs().maxCoeff() / h;
}

} // namespace geoquant
