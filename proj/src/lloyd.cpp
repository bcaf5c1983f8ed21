#include "geoquant/lloyd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace geoquant {

namespace {

Vec data_mean(const Mat& data) {
    return data.colwise().mean().transpose();
}

Mat population_cov(const Mat& data, const Vec& center) {
    const auto N = data.rows();
    Mat centered = data.rowwise() - center.transpose();
    return (centered.transpose() * centered) / static_cast<double>(N);
}

// Bounding-box diagonal; cheap stand-in for the data diameter.
double bbox_diameter(const Mat& data) {
    Vec lo = data.colwise().minCoeff().transpose();
    Vec hi = data.colwise().maxCoeff().transpose();
    return (hi - lo).norm();
}

std::vector<Eigen::Index> pick_seeds_farthest(const Mat& data, int m_init) {
    const Eigen::Index N = data.rows();
    std::vector<Eigen::Index> chosen;
    chosen.reserve(static_cast<std::size_t>(m_init));

    const Vec centroid = data_mean(data);
    Eigen::Index first = 0;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < N; ++i) {
        const double d = (data.row(i).transpose() - centroid).squaredNorm();
        if (d < best) {
            best = d;
            first = i;
        }
    }
    chosen.push_back(first);

    Vec min_dist(N);
    for (Eigen::Index i = 0; i < N; ++i) {
        min_dist(i) = (data.row(i) - data.row(first)).squaredNorm();
    }
    while (static_cast<int>(chosen.size()) < m_init) {
        Eigen::Index next = 0;
        double far = -1.0;
        for (Eigen::Index i = 0; i < N; ++i) {
            if (min_dist(i) > far) {
                far = min_dist(i);
                next = i;
            }
        }
        chosen.push_back(next);
        for (Eigen::Index i = 0; i < N; ++i) {
            min_dist(i) = std::min(min_dist(i), (data.row(i) - data.row(next)).squaredNorm());
        }
    }
    return chosen;
}

std::vector<Eigen::Index> pick_seeds_random(const Mat& data, int m_init,
                                            std::uint64_t seed) {
    const Eigen::Index N = data.rows();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(N));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed);
    for (int i = 0; i < m_init; ++i) {
        std::uniform_int_distribution<Eigen::Index> pick(i, N - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
    }
    idx.resize(static_cast<std::size_t>(m_init));
    return idx;
}

void encode_range(const Codebook& cb, const Mat& data, Eigen::Index begin,
                  Eigen::Index end, std::vector<int>& assignments) {
    const std::size_t M = cb.size();
    for (Eigen::Index i = begin; i < end; ++i) {
        const Vec x = data.row(i).transpose();
        int arg = 0;
        double best = cb.rho0(x, 0);
        for (std::size_t m = 1; m < M; ++m) {
            const double v = cb.rho0(x, m);
            if (v < best) {
                best = v;
                arg = static_cast<int>(m);
            }
        }
        assignments[static_cast<std::size_t>(i)] = arg;
    }
}

} // namespace

FitConfig resolve_defaults(const FitConfig& cfg, const Mat& data) {
    FitConfig out = cfg;
    const auto N = data.rows();
    if (out.m_init <= 0) {
        out.m_init = static_cast<int>(std::min<Eigen::Index>(32, std::max<Eigen::Index>(1, N / 10)));
    }
    if (!out.kernel.has_value()) {
        double diam = bbox_diameter(data);
        if (!(diam > 0.0)) diam = 1.0;  // all-identical data
        out.kernel = KernelSpec::gaussian(diam / std::sqrt(static_cast<double>(out.m_init)));
    }
    if (out.threads < 1) out.threads = 1;
    return out;
}

Codebook initialize(const Mat& data, const FitConfig& cfg_in) {
    const Eigen::Index N = data.rows();
    if (N < 1) throw std::invalid_argument("initialize: empty dataset");
    const FitConfig cfg = resolve_defaults(cfg_in, data);
    if (N < cfg.m_init) {
        throw std::invalid_argument("initialize: fewer samples than m_init");
    }
    if (!(cfg.epsilon > 0.0)) {
        throw std::invalid_argument("initialize: epsilon must be > 0");
    }

    const Mat global_cov = regularize_cov(population_cov(data, data_mean(data)),
                                          cfg.cov_floor_ratio, cfg.cov_abs_floor);

    std::vector<Eigen::Index> seeds =
        cfg.init_scheme == InitScheme::FarthestPoint
            ? pick_seeds_farthest(data, cfg.m_init)
            : pick_seeds_random(data, cfg.m_init, cfg.seed);

    const double m = static_cast<double>(cfg.m_init);
    std::vector<Component> comps;
    comps.reserve(seeds.size());
    for (Eigen::Index s : seeds) {
        comps.push_back(Component{GaussianModel(data.row(s).transpose(), global_cov),
                                  1.0 / m, std::log(m)});
    }
    return Codebook(std::move(comps), *cfg.kernel, cfg.mu);
}

EncodeResult encode_step(const Codebook& cb, const Mat& data, int threads) {
    const Eigen::Index N = data.rows();
    EncodeResult res;
    res.assignments.assign(static_cast<std::size_t>(N), 0);
    res.counts.assign(cb.size(), 0);
    if (N == 0) return res;

    threads = std::max(1, std::min<int>(threads, static_cast<int>(N)));
    if (threads == 1) {
        encode_range(cb, data, 0, N, res.assignments);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(threads));
        const Eigen::Index chunk = (N + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const Eigen::Index begin = t * chunk;
            const Eigen::Index end = std::min<Eigen::Index>(N, begin + chunk);
            if (begin >= end) break;
            workers.emplace_back([&, begin, end] {
                encode_range(cb, data, begin, end, res.assignments);
            });
        }
        for (auto& w : workers) w.join();
    }
    for (int a : res.assignments) res.counts[static_cast<std::size_t>(a)] += 1;
    return res;
}

Codebook centroid_step(const Codebook& cb, const Mat& data,
                       const std::vector<int>& assignments,
                       double cov_floor_ratio, double cov_abs_floor) {
    const Eigen::Index N = data.rows();
    const std::size_t M = cb.size();
    const int n = cb.dim();
    if (assignments.size() != static_cast<std::size_t>(N)) {
        throw std::invalid_argument("centroid_step: assignments size mismatch");
    }

    std::vector<long> counts(M, 0);
    Mat sums = Mat::Zero(static_cast<Eigen::Index>(M), n);
    for (Eigen::Index i = 0; i < N; ++i) {
        const auto m = static_cast<std::size_t>(assignments[static_cast<std::size_t>(i)]);
        if (m >= M) throw std::invalid_argument("centroid_step: assignment out of range");
        counts[m] += 1;
        sums.row(static_cast<Eigen::Index>(m)) += data.row(i);
    }
    for (std::size_t m = 0; m < M; ++m) {
        if (counts[m] == 0) {
            throw std::invalid_argument("centroid_step: empty cell; remove it first");
        }
    }

    const Mat& kappa = cb.kernel_weights();
    const double mu = cb.mu();

    // New means from the frozen-kernel weighted average.
    std::vector<Vec> new_means(M);
    std::vector<double> totals(M);
    for (std::size_t m = 0; m < M; ++m) {
        const Vec xbar = sums.row(static_cast<Eigen::Index>(m)).transpose()
                         / static_cast<double>(counts[m]);
        Vec acc = xbar;
        double T = 1.0;
        for (std::size_t j = 0; j < M; ++j) {
            if (j == m) continue;
            const double lam = mu * kappa(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j));
            if (lam == 0.0) continue;
            acc += lam * cb.component(j).model.mean();
            T += lam;
        }
        new_means[m] = acc / T;
        totals[m] = T;
    }

    // Cell scatter about the new means.
    std::vector<Mat> scatter(M, Mat::Zero(n, n));
    for (Eigen::Index i = 0; i < N; ++i) {
        const auto m = static_cast<std::size_t>(assignments[static_cast<std::size_t>(i)]);
        const Vec d = data.row(i).transpose() - new_means[m];
        scatter[m].noalias() += d * d.transpose();
    }

    std::vector<Component> comps;
    comps.reserve(M);
    for (std::size_t m = 0; m < M; ++m) {
        Mat K = scatter[m] / static_cast<double>(counts[m]);
        for (std::size_t j = 0; j < M; ++j) {
            if (j == m) continue;
            const double lam = mu * kappa(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j));
            if (lam == 0.0) continue;
            const Vec d = new_means[m] - cb.component(j).model.mean();
            K.noalias() += lam * (cb.component(j).model.cov() + d * d.transpose());
        }
        K /= totals[m];
        K = regularize_cov(K, cov_floor_ratio, cov_abs_floor);
        const Component& old = cb.component(m);
        comps.push_back(Component{GaussianModel(new_means[m], std::move(K)),
                                  old.weight, old.length});
    }
    return Codebook(std::move(comps), cb.kernel(), cb.mu());
}

double frozen_cell_surrogate(const Codebook& cb_old, std::size_t m,
                             const GaussianModel& candidate, const Mat& data,
                             const std::vector<int>& assignments) {
    const Eigen::Index N = data.rows();
    double nll = 0.0;
    long count = 0;
    for (Eigen::Index i = 0; i < N; ++i) {
        if (static_cast<std::size_t>(assignments[static_cast<std::size_t>(i)]) != m) continue;
        nll -= candidate.log_density(data.row(i).transpose());
        count += 1;
    }
    if (count == 0) {
        throw std::invalid_argument("frozen_cell_surrogate: empty cell");
    }
    double value = nll / static_cast<double>(count);
    const Mat& kappa = cb_old.kernel_weights();
    for (std::size_t j = 0; j < cb_old.size(); ++j) {
        if (j == m) continue;
        const double k = kappa(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j));
        if (k == 0.0) continue;
        value += cb_old.mu() * k * kl_gaussian(cb_old.component(j).model, candidate);
    }
    return value;
}

double average_distortion(const Codebook& cb, const Mat& data,
                          const std::vector<int>& assignments) {
    const Eigen::Index N = data.rows();
    if (assignments.size() != static_cast<std::size_t>(N) || N == 0) {
        throw std::invalid_argument("average_distortion: assignments size mismatch");
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
        acc += cb.rho0(data.row(i).transpose(),
                       static_cast<std::size_t>(assignments[static_cast<std::size_t>(i)]));
    }
    return acc / static_cast<double>(N);
}

FitReport fit(const Mat& data, const FitConfig& cfg_in) {
    const Eigen::Index N = data.rows();
    if (N < 1) throw std::invalid_argument("fit: empty dataset");
    const FitConfig cfg = resolve_defaults(cfg_in, data);

    Codebook cb = initialize(data, cfg);
    std::vector<double> trace;
    std::vector<StepCheck> checks;
    std::vector<int> prev_assign;
    std::vector<int> last_counts;
    int removed_total = 0;
    int iterations = 0;

    for (int r = 1; r <= cfg.max_iter; ++r) {
        EncodeResult enc = encode_step(cb, data, cfg.threads);

        StepCheck check;
        if (r == 1) {
            trace.push_back(average_distortion(cb, data, enc.assignments));
        } else if (cfg.record_step_checks) {
            check.has_encode_check = true;
            check.d_prev_assign = average_distortion(cb, data, prev_assign);
            check.d_new_assign = average_distortion(cb, data, enc.assignments);
        }

        // Empty-cell removal doubles as the weight refresh: p_m = N_m / N.
        int removed_now = 0;
        for (int c : enc.counts) {
            if (c == 0) removed_now += 1;
        }
        std::vector<int> assign = std::move(enc.assignments);
        std::vector<int> counts = enc.counts;
        Codebook cb_removed = remove_empty(cb, enc.counts);
        if (removed_now > 0) {
            removed_total += removed_now;
            std::vector<int> remap(cb.size(), -1);
            int next = 0;
            for (std::size_t m = 0; m < cb.size(); ++m) {
                if (enc.counts[m] > 0) remap[m] = next++;
            }
            for (auto& a : assign) a = remap[static_cast<std::size_t>(a)];
            counts.clear();
            for (int c : enc.counts) {
                if (c > 0) counts.push_back(c);
            }
        }

        Codebook cb_centroid = centroid_step(cb_removed, data, assign,
                                             cfg.cov_floor_ratio, cfg.cov_abs_floor);
        if (cfg.record_step_checks) {
            double worst = -std::numeric_limits<double>::infinity();
            for (std::size_t m = 0; m < cb_removed.size(); ++m) {
                const double before = frozen_cell_surrogate(
                    cb_removed, m, cb_removed.component(m).model, data, assign);
                const double after = frozen_cell_surrogate(
                    cb_removed, m, cb_centroid.component(m).model, data, assign);
                worst = std::max(worst, after - before);
            }
            check.surrogate_increase_max = worst;
            check.d_before_lengths = average_distortion(cb_centroid, data, assign);
        }

        Codebook cb_next = length_update(cb_centroid);
        if (cfg.record_step_checks) {
            check.d_after_lengths = average_distortion(cb_next, data, assign);
            for (std::size_t m = 0; m < cb_next.size(); ++m) {
                check.kraft_after_lengths += std::exp(-cb_next.component(m).length);
            }
            checks.push_back(check);
        }

        const double d_r = average_distortion(cb_next, data, assign);
        const double d_prev = trace.back();
        trace.push_back(d_r);
        iterations = r;
        cb = std::move(cb_next);
        prev_assign = assign;
        last_counts = counts;

        const bool converged = d_prev > 0.0
                                   ? (d_prev - d_r) / d_prev < cfg.epsilon
                                   : std::abs(d_prev - d_r) < cfg.epsilon;
        if (converged) break;
    }

    return FitReport{std::move(trace),       iterations,    std::move(cb),
                     std::move(prev_assign), std::move(last_counts), removed_total,
                     std::move(checks)};
}

} // namespace geoquant
