#include "geoquant/nldr.hpp"

#include <cmath>
#include <sstream>

namespace geoquant {

ChartProjector::ChartProjector(std::vector<Mat> frames, std::vector<Vec> means, int k)
    : frames_(std::move(frames)), means_(std::move(means)), k_(k) {
    if (frames_.empty() || frames_.size() != means_.size()) {
        throw std::invalid_argument("ChartProjector: frames/means mismatch");
    }
    const auto n = means_.front().size();
    if (k_ < 1 || k_ > n) {
        throw std::invalid_argument("ChartProjector: need 1 <= k <= n");
    }
    for (std::size_t m = 0; m < frames_.size(); ++m) {
        if (frames_[m].rows() != k_ || frames_[m].cols() != n || means_[m].size() != n) {
            throw std::invalid_argument("ChartProjector: frame dimension mismatch");
        }
        const Mat gram = frames_[m] * frames_[m].transpose();
        if ((gram - Mat::Identity(k_, k_)).cwiseAbs().maxCoeff() > 1e-9) {
            throw std::invalid_argument("ChartProjector: frame rows not orthonormal");
        }
    }
}

ChartProjector ChartProjector::from_codebook(const Codebook& cb, int k) {
    std::vector<Mat> frames;
    std::vector<Vec> means;
    frames.reserve(cb.size());
    means.reserve(cb.size());
    for (std::size_t m = 0; m < cb.size(); ++m) {
        const auto& g = cb.component(m).model;
        frames.push_back(g.eigenvectors().leftCols(k).transpose());
        means.push_back(g.mean());
    }
    return ChartProjector(std::move(frames), std::move(means), k);
}

ReducedPoint reduce(const Codebook& cb, const ChartProjector& proj, const Vec& x) {
    if (cb.size() != proj.charts()) {
        throw std::invalid_argument("reduce: codebook/projector size mismatch");
    }
    if (x.size() != proj.ambient_dim()) {
        throw std::invalid_argument("reduce: dimension mismatch");
    }
    std::size_t arg = 0;
    double best = cb.rho0(x, 0);
    for (std::size_t m = 1; m < cb.size(); ++m) {
        const double v = cb.rho0(x, m);
        if (v < best) {
            best = v;
            arg = m;
        }
    }
    ReducedPoint p;
    p.chart = static_cast<int>(arg);
    p.coords = proj.frame(arg) * (x - proj.mean(arg));
    return p;
}

Vec reconstruct(const ChartProjector& proj, const ReducedPoint& p) {
    const auto m = static_cast<std::size_t>(p.chart);
    if (m >= proj.charts()) {
        throw std::invalid_argument("reconstruct: chart index out of range");
    }
    if (p.coords.size() != proj.k()) {
        throw std::invalid_argument("reconstruct: coordinate dimension mismatch");
    }
    return proj.mean(m) + proj.frame(m).transpose() * p.coords;
}

double avg_reconstruction_distortion(const Codebook& cb, const ChartProjector& proj,
                                     const Mat& data) {
    const Eigen::Index N = data.rows();
    if (N == 0) throw std::invalid_argument("avg_reconstruction_distortion: empty data");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
        const Vec x = data.row(i).transpose();
        const Vec xr = reconstruct(proj, reduce(cb, proj, x));
        acc += (x - xr).squaredNorm();
    }
    return acc / static_cast<double>(N);
}

double pinsker_mismatch_bound(double ibar, double phi_avg, double mu,
                              double dist_bound_A) {
    if (!(dist_bound_A > 0.0)) {
        throw std::invalid_argument("pinsker_mismatch_bound: A must be > 0");
    }
    const double radicand = ibar - mu * phi_avg;
    if (radicand < 0.0) {
        std::ostringstream os;
        os << "pinsker_mismatch_bound: negative radicand " << radicand
           << " (ibar < mu * phi_avg; inconsistent estimates)";
        throw std::invalid_argument(os.str());
    }
    return dist_bound_A * std::sqrt(2.0 * radicand);
}

} // namespace geoquant
