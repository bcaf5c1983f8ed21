#include "geoquant/synth.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace geoquant {

EmbeddingSpec::EmbeddingSpec(std::vector<Chart> charts, int n, int k)
    : charts_(std::move(charts)), n_(n), k_(k) {
    if (charts_.empty()) throw std::invalid_argument("EmbeddingSpec: no charts");
    if (k_ < 1 || k_ >= n_) throw std::invalid_argument("EmbeddingSpec: need 1 <= k < n");
    double wsum = 0.0;
    for (const auto& c : charts_) {
        if (!(c.weight > 0.0)) throw std::invalid_argument("EmbeddingSpec: weights must be > 0");
        if (c.mu.size() != n_ || c.A.rows() != n_ || c.A.cols() != k_ ||
            c.Sigma.rows() != n_ || c.Sigma.cols() != n_) {
            throw std::invalid_argument("EmbeddingSpec: chart dimension mismatch");
        }
        wsum += c.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-9) {
        throw std::invalid_argument("EmbeddingSpec: weights must sum to 1");
    }
    effective_.reserve(charts_.size());
    for (const auto& c : charts_) {
        // Throws if A A^t + Sigma is not SPD.
        effective_.emplace_back(c.mu, Mat(c.A * c.A.transpose() + c.Sigma));
    }
}

Dataset sample_embedding(const EmbeddingSpec& spec, int count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("sample_embedding: count must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    const int n = spec.n();
    const int k = spec.k();
    const auto L = spec.chart_count();

    std::vector<double> cumw(L);
    double acc = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
        acc += spec.chart(l).weight;
        cumw[l] = acc;
    }

    std::vector<Mat> noise_chol(L);
    for (std::size_t l = 0; l < L; ++l) {
        Eigen::LLT<Mat> llt(spec.chart(l).Sigma);
        if (llt.info() != Eigen::Success) {
            throw std::invalid_argument("sample_embedding: Sigma not positive definite");
        }
        noise_chol[l] = llt.matrixL();
    }

    Dataset ds;
    ds.points.resize(count, n);
    ds.has_latents = true;
    ds.labels.resize(count);
    ds.latents.resize(count, k);

    Vec y(k), z(n);
    for (int i = 0; i < count; ++i) {
        const double toss = coin(rng);
        std::size_t l = 0;
        while (l + 1 < L && toss > cumw[l]) ++l;
        for (int j = 0; j < k; ++j) y(j) = unit(rng);
        for (int j = 0; j < n; ++j) z(j) = unit(rng);
        const auto& c = spec.chart(l);
        ds.points.row(i) = (c.mu + c.A * y + noise_chol[l] * z).transpose();
        ds.labels(i) = static_cast<int>(l);
        ds.latents.row(i) = y.transpose();
    }
    return ds;
}

double true_log_density(const EmbeddingSpec& spec, const Vec& x) {
    if (x.size() != spec.n()) {
        throw std::invalid_argument("true_log_density: dimension mismatch");
    }
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    terms.reserve(spec.chart_count());
    for (std::size_t l = 0; l < spec.chart_count(); ++l) {
        const double t = std::log(spec.chart(l).weight) + spec.effective(l).log_density(x);
        terms.push_back(t);
        max_term = std::max(max_term, t);
    }
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - max_term);
    return max_term + std::log(acc);
}

const std::vector<std::string>& builtin_fixture_names() {
    static const std::vector<std::string> names = {"two-charts-2d", "arc-3d-k1",
                                                   "clusters-5d-k2"};
    return names;
}

namespace {

EmbeddingSpec make_two_charts_2d() {
    std::vector<EmbeddingSpec::Chart> charts(2);
    for (auto& c : charts) {
        c.weight = 0.5;
        c.A = Mat::Zero(2, 1);
        c.A(0, 0) = 1.0;  // embed along the x-axis
        c.Sigma = 0.01 * Mat::Identity(2, 2);
    }
    charts[0].mu = Vec::Zero(2);
    charts[1].mu = Vec::Zero(2);
    charts[1].mu(0) = 4.0;
    return EmbeddingSpec(std::move(charts), 2, 1);
}

// Six charts along a circular arc of radius 2 in the xy-plane, unit tangent
// frames following the arc, isotropic noise 0.05.
EmbeddingSpec make_arc_3d_k1() {
    constexpr int kCharts = 6;
    constexpr double kRadius = 2.0;
    constexpr double kSpanDeg = 150.0;
    constexpr double kTangentScale = 0.45;
    constexpr double kNoise = 0.05;

    std::vector<EmbeddingSpec::Chart> charts(kCharts);
    for (int j = 0; j < kCharts; ++j) {
        const double theta = (kSpanDeg * j / (kCharts - 1)) * M_PI / 180.0;
        auto& c = charts[static_cast<std::size_t>(j)];
        c.weight = 1.0 / kCharts;
        c.mu = Vec::Zero(3);
        c.mu(0) = kRadius * std::cos(theta);
        c.mu(1) = kRadius * std::sin(theta);
        c.A = Mat::Zero(3, 1);
        c.A(0, 0) = -kTangentScale * std::sin(theta);
        c.A(1, 0) = kTangentScale * std::cos(theta);
        c.Sigma = kNoise * kNoise * Mat::Identity(3, 3);
    }
    return EmbeddingSpec(std::move(charts), 3, 1);
}

// Four well-separated clusters in R^5 with k = 2 planes whose orientations
// come from the seed.
EmbeddingSpec make_clusters_5d_k2(std::uint64_t seed) {
    constexpr int kCharts = 4;
    constexpr int n = 5;
    constexpr int k = 2;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);

    std::vector<EmbeddingSpec::Chart> charts(kCharts);
    for (int j = 0; j < kCharts; ++j) {
        auto& c = charts[static_cast<std::size_t>(j)];
        c.weight = 1.0 / kCharts;
        c.mu = Vec::Zero(n);
        c.mu(j) = 6.0;  // well separated along distinct axes
        Mat raw(n, k);
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < k; ++b) raw(a, b) = unit(rng);
        }
        // Orthonormalize and give the plane a fixed extent.
        Eigen::HouseholderQR<Mat> qr(raw);
        Mat q = qr.householderQ() * Mat::Identity(n, k);
        c.A = 1.2 * q;
        c.Sigma = 0.02 * Mat::Identity(n, n);
    }
    return EmbeddingSpec(std::move(charts), n, k);
}

} // namespace

EmbeddingSpec builtin_fixture(const std::string& name, std::uint64_t seed) {
    if (name == "two-charts-2d") return make_two_charts_2d();
    if (name == "arc-3d-k1") return make_arc_3d_k1();
    if (name == "clusters-5d-k2") return make_clusters_5d_k2(seed);
    std::ostringstream os;
    os << "unknown fixture '" << name << "'; valid names:";
    for (const auto& valid : builtin_fixture_names()) os << " " << valid;
    throw std::invalid_argument(os.str());
}

} // namespace geoquant
