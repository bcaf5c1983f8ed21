#include "geoquant/codebook.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace geoquant {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kWeightTol = 1e-9;
constexpr double kKraftTol = 1e-9;

} // namespace

Codebook::Codebook(std::vector<Component> components, KernelSpec kernel, double mu)
    : components_(std::move(components)), kernel_(std::move(kernel)), mu_(mu) {
    if (components_.empty()) {
        throw std::invalid_argument("Codebook: needs at least one component");
    }
    if (!(mu_ >= 0.0)) {
        throw std::invalid_argument("Codebook: mu must be >= 0");
    }
    kernel_.validate();

    const int n = components_.front().model.dim();
    double weight_sum = 0.0;
    double kraft_sum = 0.0;
    for (const auto& c : components_) {
        if (c.model.dim() != n) {
            throw std::invalid_argument("Codebook: mixed component dimensions");
        }
        if (!(c.weight >= 0.0)) {
            throw std::invalid_argument("Codebook: negative component weight");
        }
        if (!(c.length >= 0.0)) {
            throw std::invalid_argument("Codebook: negative codelength");
        }
        weight_sum += c.weight;
        kraft_sum += std::exp(-c.length);
    }
    if (std::abs(weight_sum - 1.0) > kWeightTol) {
        std::ostringstream os;
        os << "Codebook: weights sum to " << weight_sum << ", expected 1";
        throw std::invalid_argument(os.str());
    }
    if (kraft_sum > 1.0 + kKraftTol) {
        std::ostringstream os;
        os << "Codebook: Kraft sum " << kraft_sum << " exceeds 1";
        throw std::invalid_argument(os.str());
    }
    rebuild_cache();
}

std::size_t Codebook::check_index(std::size_t m) const {
    if (m >= components_.size()) {
        throw std::out_of_range("Codebook: component index out of range");
    }
    return m;
}

void Codebook::rebuild_cache() {
    const auto M = static_cast<Eigen::Index>(components_.size());
    kappa_.setZero(M, M);
    for (Eigen::Index i = 0; i < M; ++i) {
        for (Eigen::Index j = i + 1; j < M; ++j) {
            const double k = kernel_eval(kernel_, components_[i].model.mean(),
                                         components_[j].model.mean());
            kappa_(i, j) = k;
            kappa_(j, i) = k;
        }
    }
    phi_.setZero(M);
    for (Eigen::Index j = 0; j < M; ++j) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < M; ++i) {
            if (i == j || kappa_(i, j) == 0.0) continue;
            acc += kappa_(i, j) * kl_gaussian(components_[i].model, components_[j].model);
        }
        phi_(j) = acc;
    }
    rho0_const_.resize(M);
    const double n = static_cast<double>(dim());
    for (Eigen::Index m = 0; m < M; ++m) {
        rho0_const_(m) = 0.5 * (n * std::log(kTwoPi) + components_[m].model.log_det_cov())
                         + components_[m].length + mu_ * phi_(m);
    }
}

double Codebook::rho0(const Vec& x, std::size_t m) const {
    check_index(m);
    const auto& g = components_[m].model;
    if (x.size() != g.mean().size()) {
        throw std::invalid_argument("rho0: dimension mismatch");
    }
    return rho0_const_(static_cast<Eigen::Index>(m)) + 0.5 * g.quad_form_inv(x - g.mean());
}

double Codebook::rho(const Vec& x, std::size_t m, double log_f) const {
    return log_f + rho0(x, m);
}

double Codebook::mixture_log_density(const Vec& x) const {
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    terms.reserve(components_.size());
    for (const auto& c : components_) {
        if (c.weight <= 0.0) continue;
        const double t = std::log(c.weight) + c.model.log_density(x);
        terms.push_back(t);
        max_term = std::max(max_term, t);
    }
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - max_term);
    return max_term + std::log(acc);
}

double Codebook::weighted_phi() const {
    double acc = 0.0;
    for (std::size_t m = 0; m < components_.size(); ++m) {
        acc += components_[m].weight * phi_(static_cast<Eigen::Index>(m));
    }
    return acc;
}

Codebook length_update(const Codebook& cb) {
    std::vector<Component> comps = cb.components();
    for (auto& c : comps) {
        if (!(c.weight > 0.0)) {
            throw std::invalid_argument(
                "length_update: zero-weight component present; remove empty cells first");
        }
        c.length = std::max(0.0, -std::log(c.weight));
    }
    return Codebook(std::move(comps), cb.kernel(), cb.mu());
}

Codebook remove_empty(const Codebook& cb, const std::vector<int>& counts) {
    if (counts.size() != cb.size()) {
        throw std::invalid_argument("remove_empty: counts size mismatch");
    }
    long total = 0;
    for (int c : counts) {
        if (c < 0) throw std::invalid_argument("remove_empty: negative count");
        total += c;
    }
    if (total == 0) {
        throw std::invalid_argument("remove_empty: all cells empty");
    }
    std::vector<Component> survivors;
    survivors.reserve(cb.size());
    for (std::size_t m = 0; m < cb.size(); ++m) {
        if (counts[m] == 0) continue;
        Component c = cb.component(m);
        c.weight = static_cast<double>(counts[m]) / static_cast<double>(total);
        survivors.push_back(std::move(c));
    }
    return Codebook(std::move(survivors), cb.kernel(), cb.mu());
}

} // namespace geoquant
