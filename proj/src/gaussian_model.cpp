#include "geoquant/gaussian_model.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace geoquant {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_symmetric(const Mat& cov) {
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale) {
        std::ostringstream os;
        os << "covariance not symmetric: max |K - K^t| = " << asym;
        throw std::invalid_argument(os.str());
    }
}

// Sign convention: flip each eigenvector so its first component of
// non-negligible magnitude is positive.
void fix_eigvec_signs(Mat& vecs) {
    for (Eigen::Index j = 0; j < vecs.cols(); ++j) {
        double pivot = 0.0;
        for (Eigen::Index i = 0; i < vecs.rows(); ++i) {
            if (std::abs(vecs(i, j)) > 1e-12) {
                pivot = vecs(i, j);
                break;
            }
        }
        if (pivot == 0.0) {
            Eigen::Index imax;
            vecs.col(j).cwiseAbs().maxCoeff(&imax);
            pivot = vecs(imax, j);
        }
        if (pivot < 0.0) vecs.col(j) = -vecs.col(j);
    }
}

} // namespace

GaussianModel::GaussianModel(Vec mean, Mat cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
    const auto n = mean_.size();
    if (n < 1 || cov_.rows() != n || cov_.cols() != n) {
        throw std::invalid_argument("GaussianModel: mean/cov dimension mismatch");
    }
    if (!mean_.allFinite() || !cov_.allFinite()) {
        throw std::invalid_argument("GaussianModel: non-finite entries");
    }
    check_symmetric(cov_);

    Eigen::SelfAdjointEigenSolver<Mat> eig(cov_);
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("GaussianModel: eigendecomposition failed");
    }
    // Eigen returns ascending order; store descending.
    eigvals_ = eig.eigenvalues().reverse();
    eigvecs_ = eig.eigenvectors().rowwise().reverse();
    fix_eigvec_signs(eigvecs_);

    const double smallest = eigvals_(n - 1);
    if (!(smallest > 0.0)) {
        std::ostringstream os;
        os << "covariance not positive definite: smallest eigenvalue = " << smallest;
        throw NotPositiveDefinite(smallest, os.str());
    }

    Eigen::LLT<Mat> llt(cov_);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite(smallest, "covariance Cholesky factorization failed");
    }
    chol_lower_ = llt.matrixL();
    log_det_cov_ = 2.0 * chol_lower_.diagonal().array().log().sum();
}

double GaussianModel::quad_form_inv(const Vec& x) const {
    // Solve L z = x; then x^t K^{-1} x = |z|^2.
    Vec z = chol_lower_.triangularView<Eigen::Lower>().solve(x);
    return z.squaredNorm();
}

double GaussianModel::log_density(const Vec& x) const {
    if (x.size() != mean_.size()) {
        throw std::invalid_argument("log_density: dimension mismatch");
    }
    const double n = static_cast<double>(dim());
    return -0.5 * (n * std::log(kTwoPi) + log_det_cov_ + quad_form_inv(x - mean_));
}

Mat GaussianModel::sample(int count, std::uint64_t seed) const {
    if (count < 1) throw std::invalid_argument("sample: count must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    const int n = dim();
    Mat out(count, n);
    Vec z(n);
    for (int i = 0; i < count; ++i) {
        for (int j = 0; j < n; ++j) z(j) = unit(rng);
        out.row(i) = (mean_ + chol_lower_ * z).transpose();
    }
    return out;
}

double kl_gaussian(const GaussianModel& g_from, const GaussianModel& g_to) {
    if (g_from.dim() != g_to.dim()) {
        throw std::invalid_argument("kl_gaussian: dimension mismatch");
    }
    const int n = g_from.dim();
    const Mat& L = g_to.chol_lower();
    // tr(K_to^{-1} K_from) without forming the inverse: solve against Cholesky.
    Mat W = L.triangularView<Eigen::Lower>().solve(g_from.cov());
    Mat V = L.transpose().triangularView<Eigen::Upper>().solve(W);
    const double trace_term = V.trace();
    const double quad = g_to.quad_form_inv(g_to.mean() - g_from.mean());
    const double val = 0.5 * (g_to.log_det_cov() - g_from.log_det_cov()
                              + trace_term + quad - static_cast<double>(n));
    return val > 0.0 ? val : 0.0;
}

Mat regularize_cov(const Mat& cov, double floor_ratio, double abs_floor) {
    if (cov.rows() != cov.cols() || cov.rows() < 1) {
        throw std::invalid_argument("regularize_cov: matrix must be square");
    }
    if (!(floor_ratio > 0.0)) {
        throw std::invalid_argument("regularize_cov: floor_ratio must be > 0");
    }
    check_symmetric(cov);
    const double n = static_cast<double>(cov.rows());
    const double eps = std::max(floor_ratio * cov.trace() / n, abs_floor);
    Mat out = cov;
    out.diagonal().array() += eps;
    return out;
}

} // namespace geoquant
