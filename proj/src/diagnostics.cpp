#include "geoquant/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

namespace geoquant {

namespace {

double sample_std_error(const std::vector<double>& vals, double mean) {
    if (vals.size() < 2) return 0.0;
    double acc = 0.0;
    for (double v : vals) acc += (v - mean) * (v - mean);
    const double var = acc / static_cast<double>(vals.size() - 1);
    return std::sqrt(var / static_cast<double>(vals.size()));
}

// Derived stream seed; keeps estimator sub-draws decoupled but reproducible.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return seed ^ (0x9e3779b97f4a7c15ULL + stream * 0xbf58476d1ce4e5b9ULL);
}

} // namespace

MCEstimate mc_kl(const LogDensityFn& log_f, const SamplerFn& sample_f,
                 const LogDensityFn& log_g, int n, std::uint64_t seed) {
    if (n < 100) throw std::invalid_argument("mc_kl: need at least 100 samples");
    const Mat xs = sample_f(n, seed);
    std::vector<double> ratios(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const Vec x = xs.row(i).transpose();
        const double r = log_f(x) - log_g(x);
        if (!std::isfinite(r)) {
            std::ostringstream os;
            os << "mc_kl: non-finite log ratio at sample " << i;
            throw std::runtime_error(os.str());
        }
        ratios[static_cast<std::size_t>(i)] = r;
    }
    MCEstimate est;
    est.n_samples = n;
    est.seed = seed;
    double acc = 0.0;
    for (double r : ratios) acc += r;
    est.value = acc / static_cast<double>(n);
    est.std_error = sample_std_error(ratios, est.value);
    return est;
}

MCEstimate mc_l1(const LogDensityFn& log_f, const SamplerFn& sample_f,
                 const LogDensityFn& log_g, const SamplerFn& sample_g, int n,
                 std::uint64_t seed) {
    if (n < 100) throw std::invalid_argument("mc_l1: need at least 100 samples");
    const int n_f = n / 2;
    const int n_g = n - n_f;

    // |f - g| / ((f + g)/2) = 2 (1 - d) / (1 + d) with d = exp(-|lf - lg|).
    auto weight = [&](const Vec& x, int index) {
        const double lf = log_f(x);
        const double lg = log_g(x);
        if (!std::isfinite(lf) && !std::isfinite(lg)) {
            std::ostringstream os;
            os << "mc_l1: proposal degenerate at sample " << index
               << " (both densities vanish)";
            throw std::runtime_error(os.str());
        }
        const double d = std::exp(-std::abs(lf - lg));
        return 2.0 * (1.0 - d) / (1.0 + d);
    };

    std::vector<double> wf(static_cast<std::size_t>(n_f));
    const Mat xf = sample_f(n_f, derive_seed(seed, 1));
    for (int i = 0; i < n_f; ++i) wf[static_cast<std::size_t>(i)] = weight(xf.row(i).transpose(), i);

    std::vector<double> wg(static_cast<std::size_t>(n_g));
    const Mat xg = sample_g(n_g, derive_seed(seed, 2));
    for (int i = 0; i < n_g; ++i) wg[static_cast<std::size_t>(i)] = weight(xg.row(i).transpose(), i);

    double mean_f = 0.0, mean_g = 0.0;
    for (double w : wf) mean_f += w;
    for (double w : wg) mean_g += w;
    mean_f /= static_cast<double>(n_f);
    mean_g /= static_cast<double>(n_g);

    const double se_f = sample_std_error(wf, mean_f);
    const double se_g = sample_std_error(wg, mean_g);

    MCEstimate est;
    est.value = 0.5 * mean_f + 0.5 * mean_g;
    est.std_error = std::sqrt(0.25 * se_f * se_f + 0.25 * se_g * se_g);
    est.n_samples = n;
    est.seed = seed;
    return est;
}

double ibar_estimate(const Codebook& cb, const std::vector<int>& assignments,
                     const LogDensityFn& log_f_star, const Mat& data) {
    const Eigen::Index N = data.rows();
    if (assignments.size() != static_cast<std::size_t>(N) || N == 0) {
        throw std::invalid_argument("ibar_estimate: assignments size mismatch");
    }
    const std::size_t M = cb.size();
    std::vector<long> counts(M, 0);
    std::vector<double> ratio_sum(M, 0.0);
    for (Eigen::Index i = 0; i < N; ++i) {
        const auto m = static_cast<std::size_t>(assignments[static_cast<std::size_t>(i)]);
        if (m >= M) throw std::invalid_argument("ibar_estimate: assignment out of range");
        const Vec x = data.row(i).transpose();
        counts[m] += 1;
        ratio_sum[m] += log_f_star(x) - cb.component(m).model.log_density(x);
    }
    double total = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        if (counts[m] == 0) {
            std::cerr << "ibar_estimate: cell " << m << " is empty; skipped\n";
            continue;
        }
        const double p_hat = static_cast<double>(counts[m]) / static_cast<double>(N);
        const double d_hat = ratio_sum[m] / static_cast<double>(counts[m]) - std::log(p_hat);
        total += p_hat * (d_hat + cb.mu() * cb.complexity_phi(m));
    }
    return total;
}

ResolvabilityReport resolvability(const Codebook& cb, const LogDensityFn& log_f_star,
                                  const SamplerFn& sample_f_star, long n_train,
                                  int mc_n, std::uint64_t seed) {
    if (n_train < 1) throw std::invalid_argument("resolvability: n_train must be >= 1");
    const std::size_t M = cb.size();
    ResolvabilityReport rep;
    rep.n_train = n_train;
    rep.divergence.resize(M);
    rep.divergence_se.resize(M);
    rep.composite_length.resize(M);
    rep.term.resize(M);
    for (std::size_t m = 0; m < M; ++m) {
        const auto& comp = cb.component(m);
        if (!(comp.weight > 0.0)) {
            throw std::invalid_argument("resolvability: zero-weight component");
        }
        const auto& model = comp.model;
        const MCEstimate d = mc_kl(
            log_f_star, sample_f_star,
            [&model](const Vec& x) { return model.log_density(x); }, mc_n,
            derive_seed(seed, m));
        rep.divergence[m] = d.value;
        rep.divergence_se[m] = d.std_error;
        rep.composite_length[m] = cb.complexity_phi(m) - std::log(comp.weight);
        rep.term[m] = d.value + cb.mu() * rep.composite_length[m] / static_cast<double>(n_train);
    }
    rep.argmin = static_cast<std::size_t>(
        std::min_element(rep.term.begin(), rep.term.end()) - rep.term.begin());
    rep.r_index = rep.term[rep.argmin];
    return rep;
}

Theorem1Bounds theorem1_bound(double r_index, int codebook_size, double mu, double h,
                              double M_fstar, long n_train, double delta) {
    if (codebook_size < 1) throw std::invalid_argument("theorem1_bound: empty codebook");
    if (n_train < 1) throw std::invalid_argument("theorem1_bound: n_train must be >= 1");
    if (!(delta > 0.0) || !(delta < 1.0)) {
        throw std::invalid_argument("theorem1_bound: delta must lie in (0,1)");
    }
    if (!(M_fstar >= 0.0) || !(h >= 0.0)) {
        throw std::invalid_argument("theorem1_bound: h and M_fstar must be >= 0");
    }
    if (!(mu > h + M_fstar / 2.0)) {
        std::ostringstream os;
        os << "theorem1_bound: hypothesis violated: mu <= h + M_fstar/2 (" << mu
           << " <= " << h + M_fstar / 2.0 << ")";
        throw std::invalid_argument(os.str());
    }
    Theorem1Bounds b;
    b.alpha = M_fstar / (2.0 * (mu - h));
    const double ratio = (1.0 + b.alpha) / (1.0 - b.alpha);
    const double n = static_cast<double>(n_train);
    b.prob_bound = ratio * r_index
                   + 2.0 * mu * std::log(static_cast<double>(codebook_size) / delta)
                         / ((1.0 - b.alpha) * n);
    b.exp_bound = ratio * r_index
                  + 4.0 * static_cast<double>(codebook_size) * mu / ((1.0 - b.alpha) * n);
    return b;
}

BernsteinAdvisory bernstein_advisory(const Codebook& cb, const LogDensityFn& log_f_star,
                                     const SamplerFn& sample_f_star, int n,
                                     std::uint64_t seed) {
    if (n < 100) throw std::invalid_argument("bernstein_advisory: need at least 100 samples");
    const Mat xs = sample_f_star(n, seed);
    const std::size_t M = cb.size();
    BernsteinAdvisory adv;
    adv.mean_u.assign(M, 0.0);
    adv.var_u.assign(M, 0.0);
    std::vector<std::vector<double>> u(M, std::vector<double>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i) {
        const Vec x = xs.row(i).transpose();
        const double lf = log_f_star(x);
        for (std::size_t m = 0; m < M; ++m) {
            u[m][static_cast<std::size_t>(i)] = cb.component(m).model.log_density(x) - lf;
        }
    }
    double worst = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        double mean = 0.0;
        for (double v : u[m]) mean += v;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double v : u[m]) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n - 1);
        adv.mean_u[m] = mean;
        adv.var_u[m] = var;
        const double kl_hat = -mean;  // E[U_m] = -D(f* || g_m)
        if (kl_hat > 1e-12) worst = std::max(worst, var / kl_hat);
    }
    adv.m_candidate = worst;
    return adv;
}

std::vector<SweepRow> consistency_sweep(const FitConfig& cfg_template,
                                        const EmbeddingSpec& f_star,
                                        const std::vector<int>& n_grid,
                                        const std::vector<std::uint64_t>& seeds,
                                        int mc_n, int m_init_cap) {
    if (n_grid.empty() || seeds.empty()) {
        throw std::invalid_argument("consistency_sweep: empty grid or seed list");
    }
    for (std::size_t i = 1; i < n_grid.size(); ++i) {
        if (n_grid[i] <= n_grid[i - 1]) {
            throw std::invalid_argument("consistency_sweep: n_grid must be increasing");
        }
    }

    const LogDensityFn log_f = [&f_star](const Vec& x) { return true_log_density(f_star, x); };
    const SamplerFn sample_f = [&f_star](int count, std::uint64_t s) {
        return sample_embedding(f_star, count, s).points;
    };

    std::vector<SweepRow> rows;
    rows.reserve(n_grid.size() * seeds.size());
    for (int n_samples : n_grid) {
        const int m_init = std::min(
            m_init_cap,
            static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_samples)))));
        for (std::uint64_t seed : seeds) {
            FitConfig cfg = cfg_template;
            cfg.m_init = m_init;
            cfg.seed = seed;
            const Mat data = sample_embedding(f_star, n_samples, seed).points;
            FitReport rep = fit(data, cfg);
            const Codebook& cb = rep.final_codebook;

            SweepRow row;
            row.n_samples = n_samples;
            row.seed = seed;
            row.m_init = m_init;
            row.m_final = static_cast<int>(cb.size());
            row.kl = mc_kl(log_f, sample_f,
                           [&cb](const Vec& x) { return cb.mixture_log_density(x); },
                           mc_n, derive_seed(seed, static_cast<std::uint64_t>(n_samples)));
            const ResolvabilityReport res =
                resolvability(cb, log_f, sample_f, n_samples, std::max(200, mc_n / 10),
                              derive_seed(seed, 0xabcdef));
            row.r_index = res.r_index;
            row.max_composite_length =
                *std::max_element(res.composite_length.begin(), res.composite_length.end());
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

double sweep_median_kl(const std::vector<SweepRow>& rows, int n_samples) {
    std::vector<double> vals;
    for (const auto& r : rows) {
        if (r.n_samples == n_samples) vals.push_back(r.kl.value);
    }
    if (vals.empty()) throw std::invalid_argument("sweep_median_kl: no rows for this N");
    std::sort(vals.begin(), vals.end());
    const std::size_t mid = vals.size() / 2;
    return vals.size() % 2 == 1 ? vals[mid] : 0.5 * (vals[mid - 1] + vals[mid]);
}

} // namespace geoquant
