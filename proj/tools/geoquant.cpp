// geoquant command-line front end: synthesize datasets, fit codebooks, run
// the reduction / reconstruction / metric stages, and emit diagnostics.
// Exit codes: 0 success, 2 usage error, 1 computation error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "geoquant/diagnostics.hpp"
#include "geoquant/io.hpp"
#include "geoquant/lloyd.hpp"
#include "geoquant/manifold.hpp"
#include "geoquant/nldr.hpp"
#include "geoquant/synth.hpp"

namespace gq = geoquant;
using nlohmann::json;

namespace {

int env_default_threads() {
    const char* raw = std::getenv("GEOQUANT_THREADS");
    if (raw == nullptr) return 1;
    try {
        const int v = std::stoi(raw);
        return v >= 1 ? v : 1;
    } catch (const std::exception&) {
        throw std::invalid_argument("GEOQUANT_THREADS is not a valid thread count");
    }
}

double bbox_diameter(const gq::Mat& data) {
    const gq::Vec lo = data.colwise().minCoeff().transpose();
    const gq::Vec hi = data.colwise().maxCoeff().transpose();
    return (hi - lo).norm();
}

// ---------------------------------------------------------------------------
// configuration file handling: flat "section.key = value" entries; every key
// must be known, flags always win over file values.

struct KernelOptions {
    std::string variant;  // gaussian | inverse-distance | bump
    double sigma = 1.0;
    double d_min = 1e-9;
    double r1 = 1.0;
    double r2 = 2.0;
    bool any = false;
};

struct FitOptions {
    gq::FitConfig cfg;
    KernelOptions kernel;
    int k = 0;
};

std::optional<gq::KernelSpec> resolve_kernel(const KernelOptions& opts) {
    if (!opts.any) return std::nullopt;
    if (opts.variant == "gaussian") return gq::KernelSpec::gaussian(opts.sigma);
    if (opts.variant == "inverse-distance") return gq::KernelSpec::inverse_distance(opts.d_min);
    if (opts.variant == "bump") return gq::KernelSpec::bump(opts.r1, opts.r2);
    throw std::invalid_argument("unknown kernel.variant '" + opts.variant +
                                "' (expected gaussian, inverse-distance or bump)");
}

gq::InitScheme parse_init_scheme(const std::string& name) {
    if (name == "farthest") return gq::InitScheme::FarthestPoint;
    if (name == "random") return gq::InitScheme::RandomSubset;
    throw std::invalid_argument("unknown init scheme '" + name +
                                "' (expected farthest or random)");
}

// Applies config-file entries to the fit options; `overridden` lists the keys
// already pinned by explicit command-line flags.
void apply_fit_config(FitOptions& opts, const std::string& path,
                      const std::map<std::string, bool>& overridden) {
    const auto entries = gq::parse_config_file(path);
    for (const auto& [key, value] : entries) {
        if (overridden.count(key) && overridden.at(key)) continue;
        if (key == "fit.m_init") {
            opts.cfg.m_init = static_cast<int>(std::stol(value));
        } else if (key == "fit.mu") {
            opts.cfg.mu = gq::parse_double(value);
        } else if (key == "fit.epsilon") {
            opts.cfg.epsilon = gq::parse_double(value);
        } else if (key == "fit.max_iter") {
            opts.cfg.max_iter = static_cast<int>(std::stol(value));
        } else if (key == "fit.seed") {
            opts.cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
        } else if (key == "fit.cov_floor_ratio") {
            opts.cfg.cov_floor_ratio = gq::parse_double(value);
        } else if (key == "fit.cov_abs_floor") {
            opts.cfg.cov_abs_floor = gq::parse_double(value);
        } else if (key == "fit.init") {
            opts.cfg.init_scheme = parse_init_scheme(value);
        } else if (key == "fit.threads") {
            opts.cfg.threads = static_cast<int>(std::stol(value));
        } else if (key == "fit.k") {
            opts.k = static_cast<int>(std::stol(value));
        } else if (key == "kernel.variant") {
            opts.kernel.variant = value;
            opts.kernel.any = true;
        } else if (key == "kernel.sigma") {
            opts.kernel.sigma = gq::parse_double(value);
            opts.kernel.any = true;
        } else if (key == "kernel.d_min") {
            opts.kernel.d_min = gq::parse_double(value);
            opts.kernel.any = true;
        } else if (key == "kernel.r1") {
            opts.kernel.r1 = gq::parse_double(value);
            opts.kernel.any = true;
        } else if (key == "kernel.r2") {
            opts.kernel.r2 = gq::parse_double(value);
            opts.kernel.any = true;
        } else {
            throw std::invalid_argument(path + ": unknown configuration key '" + key + "'");
        }
    }
}

// ---------------------------------------------------------------------------
// subcommand payloads

struct SynthArgs {
    std::string fixture;
    std::string spec_path;
    std::string out;
    std::string spec_out;
    int n_samples = 1000;
    std::uint64_t seed = 1;
    std::uint64_t fixture_seed = 1;
    bool no_latents = false;
};

int run_synth(const SynthArgs& a) {
    if (a.fixture.empty() == a.spec_path.empty()) {
        throw std::invalid_argument("synth: give exactly one of --fixture or --spec");
    }
    const gq::EmbeddingSpec spec = a.fixture.empty()
                                       ? gq::load_embedding_spec(a.spec_path)
                                       : gq::builtin_fixture(a.fixture, a.fixture_seed);
    const gq::Dataset ds = gq::sample_embedding(spec, a.n_samples, a.seed);
    gq::write_dataset_csv(a.out, ds, !a.no_latents);
    if (!a.spec_out.empty()) gq::save_embedding_spec(a.spec_out, spec);
    std::cout << "N=" << a.n_samples << " n=" << spec.n() << " k=" << spec.k() << "\n";
    return 0;
}

struct FitArgs {
    std::string data;
    std::string out;
    std::string report;
    std::string config;
    FitOptions opts;
    std::map<std::string, bool> overridden;
};

json fit_report_json(const gq::FitReport& rep, const gq::FitConfig& resolved, int k) {
    json j;
    j["schema_version"] = 1;
    j["iterations"] = rep.iterations;
    j["removed_cells"] = rep.removed_cells;
    j["final_components"] = rep.final_codebook.size();
    j["distortion_trace"] = rep.distortion_trace;
    j["counts"] = rep.counts;
    j["assignments"] = rep.assignments;
    j["k"] = k;
    j["config"] = {{"m_init", resolved.m_init},
                   {"mu", resolved.mu},
                   {"epsilon", resolved.epsilon},
                   {"max_iter", resolved.max_iter},
                   {"seed", resolved.seed},
                   {"cov_floor_ratio", resolved.cov_floor_ratio},
                   {"cov_abs_floor", resolved.cov_abs_floor},
                   {"init",
                    resolved.init_scheme == gq::InitScheme::FarthestPoint ? "farthest"
                                                                          : "random"},
                   {"threads", resolved.threads}};
    return j;
}

int run_fit(FitArgs& a) {
    if (!a.config.empty()) apply_fit_config(a.opts, a.config, a.overridden);
    const gq::Dataset ds = gq::read_dataset_csv(a.data);
    const int n = static_cast<int>(ds.points.cols());
    if (a.opts.k < 1 || a.opts.k > n) {
        throw std::invalid_argument("fit: --k must lie in [1, n]");
    }
    a.opts.cfg.kernel = resolve_kernel(a.opts.kernel);
    const gq::FitConfig resolved = gq::resolve_defaults(a.opts.cfg, ds.points);
    gq::FitReport rep = gq::fit(ds.points, resolved);

    gq::ModelFile model{1,
                        n,
                        a.opts.k,
                        rep.final_codebook,
                        rep.iterations,
                        rep.distortion_trace.back(),
                        resolved.seed,
                        rep.removed_cells};
    gq::save_model(a.out, model);
    if (!a.report.empty()) {
        std::ofstream out(a.report, std::ios::binary);
        if (!out) throw std::invalid_argument("cannot open file for writing: " + a.report);
        out << fit_report_json(rep, resolved, a.opts.k).dump(2) << "\n";
    }
    std::cout << "components=" << rep.final_codebook.size() << " iterations=" << rep.iterations
              << " distortion=" << gq::format_double(rep.distortion_trace.back()) << "\n";
    return 0;
}

struct EncodeArgs {
    std::string model;
    std::string data;
    std::string out;
    int threads = 1;
};

int run_encode(const EncodeArgs& a) {
    const gq::ModelFile model = gq::load_model(a.model);
    const gq::Dataset ds = gq::read_dataset_csv(a.data);
    if (ds.points.cols() != model.n) {
        throw std::invalid_argument("encode: dataset dimension does not match the model");
    }
    const gq::ChartProjector proj =
        gq::ChartProjector::from_codebook(model.codebook, model.k);
    const gq::EncodeResult enc = gq::encode_step(model.codebook, ds.points, a.threads);
    std::vector<gq::ReducedPoint> reduced(static_cast<std::size_t>(ds.points.rows()));
    for (Eigen::Index i = 0; i < ds.points.rows(); ++i) {
        const auto m = static_cast<std::size_t>(enc.assignments[static_cast<std::size_t>(i)]);
        reduced[static_cast<std::size_t>(i)].chart = static_cast<int>(m);
        reduced[static_cast<std::size_t>(i)].coords =
            proj.frame(m) * (ds.points.row(i).transpose() - proj.mean(m));
    }
    gq::write_reduced_csv(a.out, reduced);
    std::cout << "encoded " << ds.points.rows() << " points into k=" << model.k
              << " coordinates\n";
    return 0;
}

struct ReconstructArgs {
    std::string model;
    std::string input;
    std::string out;
    std::string data;
};

int run_reconstruct(const ReconstructArgs& a) {
    const gq::ModelFile model = gq::load_model(a.model);
    const auto reduced = gq::read_reduced_csv(a.input);
    if (reduced.front().coords.size() != model.k) {
        throw std::invalid_argument("reconstruct: reduced k does not match the model");
    }
    const gq::ChartProjector proj =
        gq::ChartProjector::from_codebook(model.codebook, model.k);

    gq::Dataset out_ds;
    out_ds.points.resize(static_cast<Eigen::Index>(reduced.size()), model.n);
    for (std::size_t i = 0; i < reduced.size(); ++i) {
        if (reduced[i].chart < 0 ||
            static_cast<std::size_t>(reduced[i].chart) >= model.codebook.size()) {
            throw std::invalid_argument("reconstruct: chart index out of range in input");
        }
        out_ds.points.row(static_cast<Eigen::Index>(i)) =
            gq::reconstruct(proj, reduced[i]).transpose();
    }
    gq::write_dataset_csv(a.out, out_ds, false);

    if (!a.data.empty()) {
        const gq::Dataset orig = gq::read_dataset_csv(a.data);
        if (orig.points.rows() != out_ds.points.rows() || orig.points.cols() != model.n) {
            throw std::invalid_argument("reconstruct: --data shape does not match the input");
        }
        const double dbar =
            (orig.points - out_ds.points).rowwise().squaredNorm().mean();
        std::cout << "d_bar " << gq::format_double(dbar) << "\n";
    }
    return 0;
}

struct MetricArgs {
    std::string model;
    std::string input;
    std::string out;
    double delta_ratio = 0.1;
};

int run_metric(const MetricArgs& a) {
    const gq::ModelFile model = gq::load_model(a.model);
    const auto reduced = gq::read_reduced_csv(a.input);
    if (reduced.front().coords.size() != model.k) {
        throw std::invalid_argument("metric: reduced k does not match the model");
    }
    const gq::ChartAtlas atlas = gq::build_atlas(model.codebook, model.k, a.delta_ratio);

    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open file for writing: " + a.out);
    const int k = model.k;
    out << "defined";
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) out << ",g" << (r + 1) << (c + 1);
    }
    out << "\n";
    for (const auto& p : reduced) {
        if (p.chart < 0 || static_cast<std::size_t>(p.chart) >= atlas.size()) {
            throw std::invalid_argument("metric: chart index out of range in input");
        }
        const gq::MetricValue g =
            gq::metric_matrix(atlas, p.coords, static_cast<std::size_t>(p.chart));
        out << (g.defined ? 1 : 0);
        for (int r = 0; r < k; ++r) {
            for (int c = 0; c < k; ++c) out << "," << gq::format_double(g.form(r, c));
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("failed writing metric CSV: " + a.out);
    std::cout << "metric rows=" << reduced.size() << "\n";
    return 0;
}

struct EvalArgs {
    std::string model;
    std::string fstar;
    std::string data;
    std::string out;
    std::string sweep_out;
    int mc_n = 20000;
    std::uint64_t seed = 1;
    long n_train = 0;
    double h = -1.0;
    double m_fstar = -1.0;
    double delta = 0.05;
    double dist_bound_a = 0.0;
    bool sweep = false;
    std::vector<int> sweep_grid{500, 1000, 2000, 4000, 8000};
    std::vector<std::uint64_t> sweep_seeds{1, 2, 3, 4, 5};
    int sweep_mc_n = 20000;
    double sweep_mu = 0.0;
};

int run_eval(const EvalArgs& a) {
    const gq::ModelFile model = gq::load_model(a.model);
    const gq::EmbeddingSpec f_star = gq::load_embedding_spec(a.fstar);
    if (f_star.n() != model.n) {
        throw std::invalid_argument("eval: f* dimension does not match the model");
    }
    const gq::LogDensityFn log_f = [&f_star](const gq::Vec& x) {
        return gq::true_log_density(f_star, x);
    };
    const gq::SamplerFn sample_f = [&f_star](int count, std::uint64_t seed) {
        return gq::sample_embedding(f_star, count, seed).points;
    };

    long n_train = a.n_train;
    std::optional<gq::Dataset> data;
    if (!a.data.empty()) {
        data = gq::read_dataset_csv(a.data);
        if (data->points.cols() != model.n) {
            throw std::invalid_argument("eval: dataset dimension does not match the model");
        }
        if (n_train == 0) n_train = data->points.rows();
    }
    if (n_train <= 0) {
        throw std::invalid_argument("eval: give --n-train or --data to set the training size");
    }

    const gq::Codebook& cb = model.codebook;
    const gq::ResolvabilityReport res =
        gq::resolvability(cb, log_f, sample_f, n_train, a.mc_n, a.seed);
    const gq::BernsteinAdvisory adv =
        gq::bernstein_advisory(cb, log_f, sample_f, std::max(1000, a.mc_n / 10), a.seed + 1);
    const gq::MCEstimate mix_kl =
        gq::mc_kl(log_f, sample_f,
                  [&cb](const gq::Vec& x) { return cb.mixture_log_density(x); }, a.mc_n,
                  a.seed + 2);

    json j;
    j["schema_version"] = 1;
    j["components"] = cb.size();
    j["mu"] = cb.mu();
    j["n_train"] = n_train;
    j["seed"] = a.seed;
    j["mc_n"] = a.mc_n;
    j["r_index"] = res.r_index;
    j["argmin"] = res.argmin;
    j["mixture_kl"] = {{"value", mix_kl.value}, {"std_error", mix_kl.std_error}};
    json per_m = json::array();
    for (std::size_t m = 0; m < cb.size(); ++m) {
        per_m.push_back({{"kl", res.divergence[m]},
                         {"kl_stderr", res.divergence_se[m]},
                         {"L", res.composite_length[m]},
                         {"term", res.term[m]},
                         {"phi", cb.complexity_phi(m)},
                         {"weight", cb.component(m).weight},
                         {"length", cb.component(m).length},
                         {"bernstein_mean_u", adv.mean_u[m]},
                         {"bernstein_var_u", adv.var_u[m]}});
    }
    j["per_component"] = per_m;
    j["bernstein_m_candidate_advisory"] = adv.m_candidate;

    if (data.has_value()) {
        const gq::EncodeResult enc = gq::encode_step(cb, data->points);
        const double ibar = gq::ibar_estimate(cb, enc.assignments, log_f, data->points);
        j["ibar"] = ibar;
        const double phi_avg = cb.weighted_phi();
        j["phi_avg"] = phi_avg;
        const double A = a.dist_bound_a > 0.0
                             ? a.dist_bound_a
                             : bbox_diameter(data->points) * bbox_diameter(data->points);
        j["dist_bound_a"] = A;
        if (ibar >= cb.mu() * phi_avg) {
            j["pinsker_mismatch_bound"] = gq::pinsker_mismatch_bound(ibar, phi_avg, cb.mu(), A);
        } else {
            j["pinsker_mismatch_bound"] = nullptr;  // noisy estimate undercut mu*phi
        }
    }
    if (a.h >= 0.0 && a.m_fstar >= 0.0) {
        const gq::Theorem1Bounds b = gq::theorem1_bound(
            res.r_index, static_cast<int>(cb.size()), cb.mu(), a.h, a.m_fstar, n_train, a.delta);
        j["theorem1"] = {{"alpha", b.alpha},       {"prob_bound", b.prob_bound},
                         {"exp_bound", b.exp_bound}, {"h", a.h},
                         {"m_fstar", a.m_fstar},     {"delta", a.delta}};
    }

    if (a.sweep) {
        gq::FitConfig tmpl;
        tmpl.mu = a.sweep_mu;
        const auto rows =
            gq::consistency_sweep(tmpl, f_star, a.sweep_grid, a.sweep_seeds, a.sweep_mc_n);
        json jrows = json::array();
        for (const auto& r : rows) {
            jrows.push_back({{"n", r.n_samples},
                             {"seed", r.seed},
                             {"m_init", r.m_init},
                             {"m_final", r.m_final},
                             {"kl", r.kl.value},
                             {"kl_stderr", r.kl.std_error},
                             {"r_index", r.r_index},
                             {"max_L", r.max_composite_length}});
        }
        j["sweep"] = jrows;
        if (!a.sweep_out.empty()) {
            std::ofstream out(a.sweep_out, std::ios::binary);
            if (!out) throw std::invalid_argument("cannot open file for writing: " + a.sweep_out);
            out << "n,seed,m_init,m_final,kl,kl_stderr,r_index,max_L\n";
            for (const auto& r : rows) {
                out << r.n_samples << "," << r.seed << "," << r.m_init << "," << r.m_final << ","
                    << gq::format_double(r.kl.value) << ","
                    << gq::format_double(r.kl.std_error) << ","
                    << gq::format_double(r.r_index) << ","
                    << gq::format_double(r.max_composite_length) << "\n";
            }
        }
    }

    if (a.out.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(a.out, std::ios::binary);
        if (!out) throw std::invalid_argument("cannot open file for writing: " + a.out);
        out << j.dump(2) << "\n";
        std::cout << "r_index=" << gq::format_double(res.r_index)
                  << " mixture_kl=" << gq::format_double(mix_kl.value) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"complexity-regularized Gaussian-mixture quantization for "
                 "nonlinear dimensionality reduction"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "sample a synthetic dataset");
    synth->add_option("--fixture", synth_args.fixture,
                      "builtin fixture: two-charts-2d | arc-3d-k1 | clusters-5d-k2");
    synth->add_option("--spec", synth_args.spec_path, "embedding spec file to sample from");
    synth->add_option("--n-samples", synth_args.n_samples, "number of samples")
        ->check(CLI::PositiveNumber);
    synth->add_option("--seed", synth_args.seed, "sampling seed");
    synth->add_option("--fixture-seed", synth_args.fixture_seed,
                      "seed for seed-dependent fixtures");
    synth->add_option("--out", synth_args.out, "output dataset CSV")->required();
    synth->add_option("--spec-out", synth_args.spec_out, "also write the embedding spec");
    synth->add_flag("--no-latents", synth_args.no_latents, "omit latent columns");

    FitArgs fit_args;
    fit_args.opts.cfg.threads = env_default_threads();
    auto* fitc = app.add_subcommand("fit", "fit a codebook by Lloyd descent");
    fitc->add_option("--data", fit_args.data, "training dataset CSV")->required();
    fitc->add_option("--out", fit_args.out, "output model file")->required();
    fitc->add_option("--report", fit_args.report, "output fit report JSON");
    fitc->add_option("--config", fit_args.config, "configuration file");
    fitc->add_option("--k", fit_args.opts.k, "intrinsic dimension (required here or in config)");
    auto* o_minit = fitc->add_option("--m-init", fit_args.opts.cfg.m_init, "initial codebook size");
    auto* o_mu = fitc->add_option("--mu", fit_args.opts.cfg.mu, "complexity trade-off");
    auto* o_eps = fitc->add_option("--epsilon", fit_args.opts.cfg.epsilon, "stop threshold");
    auto* o_maxit = fitc->add_option("--max-iter", fit_args.opts.cfg.max_iter, "iteration cap");
    auto* o_seed = fitc->add_option("--seed", fit_args.opts.cfg.seed, "fit seed");
    auto* o_floor = fitc->add_option("--cov-floor-ratio", fit_args.opts.cfg.cov_floor_ratio,
                                     "covariance floor ratio");
    auto* o_abs = fitc->add_option("--cov-abs-floor", fit_args.opts.cfg.cov_abs_floor,
                                   "absolute covariance floor");
    std::string init_name;
    auto* o_init = fitc->add_option("--init", init_name, "seeding: farthest | random");
    auto* o_thr = fitc->add_option("--threads", fit_args.opts.cfg.threads,
                                   "worker threads (default GEOQUANT_THREADS)");
    auto* o_kvar = fitc->add_option("--kernel", fit_args.opts.kernel.variant,
                                    "kernel variant: gaussian | inverse-distance | bump");
    auto* o_sigma = fitc->add_option("--sigma", fit_args.opts.kernel.sigma, "gaussian kernel sigma");
    auto* o_dmin = fitc->add_option("--d-min", fit_args.opts.kernel.d_min,
                                    "inverse-distance clamp");
    auto* o_r1 = fitc->add_option("--r1", fit_args.opts.kernel.r1, "bump inner radius");
    auto* o_r2 = fitc->add_option("--r2", fit_args.opts.kernel.r2, "bump outer radius");

    EncodeArgs encode_args;
    encode_args.threads = env_default_threads();
    auto* encode = app.add_subcommand("encode", "dimension-reduce a dataset");
    encode->add_option("--model", encode_args.model, "model file")->required();
    encode->add_option("--data", encode_args.data, "dataset CSV")->required();
    encode->add_option("--out", encode_args.out, "output reduced CSV")->required();
    encode->add_option("--threads", encode_args.threads, "worker threads");

    ReconstructArgs recon_args;
    auto* recon = app.add_subcommand("reconstruct", "map reduced points back to R^n");
    recon->add_option("--model", recon_args.model, "model file")->required();
    recon->add_option("--input", recon_args.input, "reduced CSV")->required();
    recon->add_option("--out", recon_args.out, "output CSV of n-vectors")->required();
    recon->add_option("--data", recon_args.data,
                      "original dataset CSV; prints the average squared distortion");

    MetricArgs metric_args;
    auto* metric = app.add_subcommand("metric", "evaluate the Riemannian metric");
    metric->add_option("--model", metric_args.model, "model file")->required();
    metric->add_option("--input", metric_args.input, "reduced CSV")->required();
    metric->add_option("--out", metric_args.out, "output metric CSV")->required();
    metric->add_option("--delta-ratio", metric_args.delta_ratio, "bump shell width ratio")
        ->check(CLI::Range(1e-9, 0.999999));

    EvalArgs eval_args;
    auto* evalc = app.add_subcommand("eval", "known-density diagnostics");
    evalc->add_option("--model", eval_args.model, "model file")->required();
    evalc->add_option("--fstar", eval_args.fstar, "embedding spec of the true density")
        ->required();
    evalc->add_option("--data", eval_args.data, "training dataset CSV (enables ibar)");
    evalc->add_option("--out", eval_args.out, "output JSON report (stdout when omitted)");
    evalc->add_option("--mc-n", eval_args.mc_n, "Monte-Carlo sample count");
    evalc->add_option("--seed", eval_args.seed, "estimator seed");
    evalc->add_option("--n-train", eval_args.n_train, "training size for the bounds");
    evalc->add_option("--bernstein-h", eval_args.h, "Bernstein constant h (user-asserted)");
    evalc->add_option("--m-fstar", eval_args.m_fstar, "moment ratio M(f*) (user-asserted)");
    evalc->add_option("--delta", eval_args.delta, "confidence parameter");
    evalc->add_option("--dist-bound-a", eval_args.dist_bound_a,
                      "squared-error bound A (default: squared data diameter)");
    evalc->add_flag("--sweep", eval_args.sweep, "run the consistency sweep");
    evalc->add_option("--sweep-grid", eval_args.sweep_grid, "training sizes for the sweep");
    evalc->add_option("--sweep-seeds", eval_args.sweep_seeds, "seeds for the sweep");
    evalc->add_option("--sweep-mc-n", eval_args.sweep_mc_n, "Monte-Carlo samples per sweep row");
    evalc->add_option("--sweep-mu", eval_args.sweep_mu, "trade-off for sweep fits");
    evalc->add_option("--sweep-out", eval_args.sweep_out, "sweep table CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed()) return run_synth(synth_args);
        if (fitc->parsed()) {
            if (o_init->count() > 0) fit_args.opts.cfg.init_scheme = parse_init_scheme(init_name);
            fit_args.opts.kernel.any =
                o_kvar->count() || o_sigma->count() || o_dmin->count() || o_r1->count() ||
                o_r2->count() || fit_args.opts.kernel.any;
            if ((o_sigma->count() || o_dmin->count() || o_r1->count() || o_r2->count()) &&
                o_kvar->count() == 0 && fit_args.opts.kernel.variant.empty()) {
                throw std::invalid_argument("fit: kernel parameters given without --kernel");
            }
            fit_args.overridden = {{"fit.m_init", o_minit->count() > 0},
                                   {"fit.mu", o_mu->count() > 0},
                                   {"fit.epsilon", o_eps->count() > 0},
                                   {"fit.max_iter", o_maxit->count() > 0},
                                   {"fit.seed", o_seed->count() > 0},
                                   {"fit.cov_floor_ratio", o_floor->count() > 0},
                                   {"fit.cov_abs_floor", o_abs->count() > 0},
                                   {"fit.init", o_init->count() > 0},
                                   {"fit.threads", o_thr->count() > 0},
                                   {"fit.k", fit_args.opts.k != 0},
                                   {"kernel.variant", o_kvar->count() > 0},
                                   {"kernel.sigma", o_sigma->count() > 0},
                                   {"kernel.d_min", o_dmin->count() > 0},
                                   {"kernel.r1", o_r1->count() > 0},
                                   {"kernel.r2", o_r2->count() > 0}};
            return run_fit(fit_args);
        }
        if (encode->parsed()) return run_encode(encode_args);
        if (recon->parsed()) return run_reconstruct(recon_args);
        if (metric->parsed()) return run_metric(metric_args);
        if (evalc->parsed()) return run_eval(eval_args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
