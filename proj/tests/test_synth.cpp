#include <cmath>

#include "doctest.h"
#include "geoquant/synth.hpp"
#include "oracle_helpers.hpp"

using namespace geoquant;

namespace {

EmbeddingSpec one_chart_spec(const Vec& mu, const Mat& A, const Mat& sigma) {
    std::vector<EmbeddingSpec::Chart> charts(1);
    charts[0].weight = 1.0;
    charts[0].mu = mu;
    charts[0].A = A;
    charts[0].Sigma = sigma;
    return EmbeddingSpec(std::move(charts), static_cast<int>(mu.size()),
                         static_cast<int>(A.cols()));
}

} // namespace

TEST_CASE("sample_embedding") {
    SUBCASE("single chart with A = 0 reduces to plain Gaussian noise") {
        Mat sigma(2, 2);
        sigma << 0.5, 0.1, 0.1, 0.3;
        EmbeddingSpec spec = one_chart_spec(Vec::Constant(2, 1.0), Mat::Zero(2, 1), sigma);
        Dataset ds = sample_embedding(spec, 100000, 7);
        const Vec mean = ds.points.colwise().mean().transpose();
        CHECK((mean - Vec::Constant(2, 1.0)).cwiseAbs().maxCoeff() < 0.02);
        Mat centered = ds.points.rowwise() - mean.transpose();
        Mat cov = centered.transpose() * centered / 100000.0;
        CHECK((cov - sigma).cwiseAbs().maxCoeff() < 0.02);
    }
    SUBCASE("law of total covariance: sample cov approaches A A^t + Sigma") {
        Mat A(3, 1);
        A << 1.0, 0.5, -0.25;
        Mat sigma = 0.2 * Mat::Identity(3, 3);
        EmbeddingSpec spec = one_chart_spec(Vec::Zero(3), A, sigma);
        Dataset ds = sample_embedding(spec, 100000, 11);
        const Vec mean = ds.points.colwise().mean().transpose();
        Mat centered = ds.points.rowwise() - mean.transpose();
        Mat cov = centered.transpose() * centered / 100000.0;
        const Mat expected = A * A.transpose() + sigma;
        // 3-sigma style elementwise tolerance at this sample size
        CHECK((cov - expected).cwiseAbs().maxCoeff() < 0.03);
    }
    SUBCASE("same seed reproduces, labels and latents recorded") {
        EmbeddingSpec spec = builtin_fixture("two-charts-2d");
        Dataset a = sample_embedding(spec, 500, 13);
        Dataset b = sample_embedding(spec, 500, 13);
        CHECK((a.points - b.points).cwiseAbs().maxCoeff() == 0.0);
        REQUIRE(a.has_latents);
        CHECK((a.labels - b.labels).cwiseAbs().maxCoeff() == 0);
        CHECK((a.latents - b.latents).cwiseAbs().maxCoeff() == 0.0);
        CHECK(a.labels.minCoeff() >= 0);
        CHECK(a.labels.maxCoeff() <= 1);
        Dataset c = sample_embedding(spec, 500, 14);
        CHECK((a.points - c.points).cwiseAbs().maxCoeff() > 0.0);
    }
    SUBCASE("latent-conditional moments match the chain per chart") {
        EmbeddingSpec spec = builtin_fixture("two-charts-2d");
        Dataset ds = sample_embedding(spec, 100000, 17);
        for (int label = 0; label < 2; ++label) {
            std::vector<Eigen::Index> rows;
            for (Eigen::Index i = 0; i < ds.points.rows(); ++i) {
                if (ds.labels(i) == label) rows.push_back(i);
            }
            REQUIRE(rows.size() > 10000);
            Mat pts(static_cast<Eigen::Index>(rows.size()), 2);
            for (std::size_t i = 0; i < rows.size(); ++i) pts.row(static_cast<Eigen::Index>(i)) = ds.points.row(rows[i]);
            const Vec mean = pts.colwise().mean().transpose();
            const auto& chart = spec.chart(static_cast<std::size_t>(label));
            CHECK((mean - chart.mu).cwiseAbs().maxCoeff() < 0.03);
            Mat centered = pts.rowwise() - mean.transpose();
            Mat cov = centered.transpose() * centered / static_cast<double>(rows.size());
            const Mat expected = chart.A * chart.A.transpose() + chart.Sigma;
            CHECK((cov - expected).cwiseAbs().maxCoeff() < 0.05);
        }
    }
    SUBCASE("invalid spec rejected") {
        std::vector<EmbeddingSpec::Chart> charts(1);
        charts[0].weight = 0.5;  // does not sum to 1
        charts[0].mu = Vec::Zero(2);
        charts[0].A = Mat::Zero(2, 1);
        charts[0].Sigma = Mat::Identity(2, 2);
        CHECK_THROWS_AS(EmbeddingSpec(std::move(charts), 2, 1), std::invalid_argument);
    }
}

TEST_CASE("true_log_density") {
    SUBCASE("single chart matches the effective Gaussian exactly") {
        Mat A(3, 1);
        A << 0.7, -0.2, 0.1;
        Mat sigma = 0.3 * Mat::Identity(3, 3);
        EmbeddingSpec spec = one_chart_spec(Vec::Zero(3), A, sigma);
        GaussianModel direct(Vec::Zero(3), Mat(A * A.transpose() + sigma));
        std::mt19937_64 rng(19);
        for (int trial = 0; trial < 20; ++trial) {
            const Vec x = oracle::random_vec(3, rng, 2.0);
            CHECK(true_log_density(spec, x) ==
                  doctest::Approx(direct.log_density(x)).epsilon(1e-13));
        }
    }
    SUBCASE("two identical equal-weight charts collapse to one") {
        Mat A(2, 1);
        A << 1.0, 0.0;
        Mat sigma = 0.1 * Mat::Identity(2, 2);
        std::vector<EmbeddingSpec::Chart> charts(2);
        for (auto& c : charts) {
            c.weight = 0.5;
            c.mu = Vec::Zero(2);
            c.A = A;
            c.Sigma = sigma;
        }
        EmbeddingSpec two(std::move(charts), 2, 1);
        EmbeddingSpec one = one_chart_spec(Vec::Zero(2), A, sigma);
        std::mt19937_64 rng(23);
        for (int trial = 0; trial < 20; ++trial) {
            const Vec x = oracle::random_vec(2, rng, 2.0);
            CHECK(true_log_density(two, x) ==
                  doctest::Approx(true_log_density(one, x)).epsilon(1e-13));
        }
    }
    SUBCASE("density integrates to one on a 2-D grid") {
        EmbeddingSpec spec = builtin_fixture("two-charts-2d");
        const double total = oracle::integrate_2d(
            [&](double x, double y) {
                Vec v(2);
                v << x, y;
                return std::exp(true_log_density(spec, v));
            },
            -8.0, 12.0, -3.0, 3.0, 500);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-2));
    }
    SUBCASE("finite for far-out points") {
        EmbeddingSpec spec = builtin_fixture("arc-3d-k1");
        Vec x = Vec::Constant(3, 100.0);
        CHECK(std::isfinite(true_log_density(spec, x)));
    }
}

TEST_CASE("builtin fixtures") {
    SUBCASE("two-charts-2d matches its documented definition") {
        EmbeddingSpec spec = builtin_fixture("two-charts-2d");
        CHECK(spec.n() == 2);
        CHECK(spec.k() == 1);
        REQUIRE(spec.chart_count() == 2);
        CHECK(spec.chart(0).weight == 0.5);
        CHECK(spec.chart(1).weight == 0.5);
        CHECK(spec.chart(0).mu.cwiseAbs().maxCoeff() == 0.0);
        CHECK(spec.chart(1).mu(0) == 4.0);
        CHECK(spec.chart(1).mu(1) == 0.0);
        CHECK(spec.chart(0).A(0, 0) == 1.0);
        CHECK(spec.chart(0).A(1, 0) == 0.0);
        CHECK((spec.chart(0).Sigma - 0.01 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("all fixtures satisfy the embedding invariants") {
        for (const auto& name : builtin_fixture_names()) {
            const EmbeddingSpec spec = builtin_fixture(name, 5);
            CHECK(spec.k() < spec.n());
            double wsum = 0.0;
            for (std::size_t l = 0; l < spec.chart_count(); ++l) {
                wsum += spec.chart(l).weight;
                CHECK(spec.effective(l).eigenvalues().minCoeff() > 0.0);
            }
            CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    SUBCASE("arc fixture has six charts along the arc") {
        EmbeddingSpec spec = builtin_fixture("arc-3d-k1");
        CHECK(spec.n() == 3);
        CHECK(spec.k() == 1);
        CHECK(spec.chart_count() == 6);
        for (std::size_t l = 0; l < 6; ++l) {
            CHECK(spec.chart(l).mu.head(2).norm() == doctest::Approx(2.0).epsilon(1e-12));
            // tangent direction orthogonal to the radius
            CHECK(std::abs(spec.chart(l).mu.head(2).dot(spec.chart(l).A.col(0).head(2))) <=
                  1e-12);
        }
    }
    SUBCASE("unknown fixture error lists the valid names") {
        try {
            builtin_fixture("nope");
            FAIL("expected an exception");
        } catch (const std::invalid_argument& e) {
            const std::string msg = e.what();
            for (const auto& name : builtin_fixture_names()) {
                CHECK(msg.find(name) != std::string::npos);
            }
        }
    }
}
