#include "geoquant/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace geoquant {

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file for reading: " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
    if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Reads one "name value..." line and checks the leading tag.
std::vector<std::string> expect_line(std::istream& in, const std::string& tag,
                                     const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument(path + ": unexpected end of file, expected '" + tag + "'");
    }
    std::istringstream ss(trim(line));
    std::vector<std::string> tokens;
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    if (tokens.empty() || tokens.front() != tag) {
        throw std::invalid_argument(path + ": expected line starting with '" + tag + "', got '" +
                                    line + "'");
    }
    return tokens;
}

long parse_long(const std::string& s) {
    std::size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid integer: '" + s + "'");
    }
    if (pos != s.size()) throw std::invalid_argument("invalid integer: '" + s + "'");
    return v;
}

void write_vector(std::ostream& out, const std::string& tag, const Vec& v) {
    out << tag;
    for (Eigen::Index i = 0; i < v.size(); ++i) out << " " << format_double(v(i));
    out << "\n";
}

void write_matrix_row_major(std::ostream& out, const std::string& tag, const Mat& m) {
    out << tag;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) out << " " << format_double(m(r, c));
    }
    out << "\n";
}

Vec parse_vector(const std::vector<std::string>& tokens, Eigen::Index expect,
                 const std::string& what) {
    if (static_cast<Eigen::Index>(tokens.size()) - 1 != expect) {
        throw std::invalid_argument(what + ": expected " + std::to_string(expect) + " values");
    }
    Vec v(expect);
    for (Eigen::Index i = 0; i < expect; ++i) {
        v(i) = parse_double(tokens[static_cast<std::size_t>(i + 1)]);
    }
    return v;
}

Mat parse_matrix_row_major(const std::vector<std::string>& tokens, Eigen::Index rows,
                           Eigen::Index cols, const std::string& what) {
    if (static_cast<Eigen::Index>(tokens.size()) - 1 != rows * cols) {
        throw std::invalid_argument(what + ": expected " + std::to_string(rows * cols) +
                                    " values");
    }
    Mat m(rows, cols);
    std::size_t t = 1;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = parse_double(tokens[t++]);
    }
    return m;
}

void write_kernel(std::ostream& out, const KernelSpec& k) {
    switch (k.kind) {
        case KernelKind::InverseDistance:
            out << "kernel inverse-distance " << format_double(k.d_min) << "\n";
            return;
        case KernelKind::Gaussian:
            out << "kernel gaussian " << format_double(k.sigma) << "\n";
            return;
        case KernelKind::Bump:
            out << "kernel bump " << format_double(k.r1) << " " << format_double(k.r2) << "\n";
            return;
    }
    throw std::logic_error("write_kernel: unknown kernel kind");
}

KernelSpec parse_kernel(const std::vector<std::string>& tokens, const std::string& path) {
    if (tokens.size() < 2) throw std::invalid_argument(path + ": malformed kernel line");
    const std::string& kind = tokens[1];
    if (kind == "inverse-distance") {
        if (tokens.size() != 3) throw std::invalid_argument(path + ": kernel inverse-distance needs d_min");
        return KernelSpec::inverse_distance(parse_double(tokens[2]));
    }
    if (kind == "gaussian") {
        if (tokens.size() != 3) throw std::invalid_argument(path + ": kernel gaussian needs sigma");
        return KernelSpec::gaussian(parse_double(tokens[2]));
    }
    if (kind == "bump") {
        if (tokens.size() != 4) throw std::invalid_argument(path + ": kernel bump needs r1 r2");
        return KernelSpec::bump(parse_double(tokens[2]), parse_double(tokens[3]));
    }
    throw std::invalid_argument(path + ": unknown kernel kind '" + kind + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("invalid number: empty field");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) {
        throw std::invalid_argument("invalid number: '" + s + "'");
    }
    return v;
}

void save_model(const std::string& path, const ModelFile& model) {
    auto out = open_output(path);
    out << "geoquant-model " << model.schema_version << "\n";
    out << "n " << model.n << "\n";
    out << "k " << model.k << "\n";
    out << "trade-off " << format_double(model.codebook.mu()) << "\n";
    write_kernel(out, model.codebook.kernel());
    out << "components " << model.codebook.size() << "\n";
    for (std::size_t m = 0; m < model.codebook.size(); ++m) {
        const auto& c = model.codebook.component(m);
        out << "component " << m << "\n";
        out << "weight " << format_double(c.weight) << "\n";
        out << "length " << format_double(c.length) << "\n";
        write_vector(out, "mean", c.model.mean());
        write_matrix_row_major(out, "cov", c.model.cov());
    }
    out << "iterations " << model.iterations << "\n";
    out << "final_distortion " << format_double(model.final_distortion) << "\n";
    out << "seed " << model.seed << "\n";
    out << "removed_cells " << model.removed_cells << "\n";
    if (!out) throw std::runtime_error("failed writing model file: " + path);
}

ModelFile load_model(const std::string& path) {
    auto in = open_input(path);
    auto header = expect_line(in, "geoquant-model", path);
    if (header.size() != 2 || parse_long(header[1]) != 1) {
        throw std::invalid_argument(path + ": unsupported model schema version");
    }
    const long n = parse_long(expect_line(in, "n", path).at(1));
    const long k = parse_long(expect_line(in, "k", path).at(1));
    const double mu = parse_double(expect_line(in, "trade-off", path).at(1));
    const KernelSpec kernel = parse_kernel(expect_line(in, "kernel", path), path);
    const long M = parse_long(expect_line(in, "components", path).at(1));
    if (n < 1 || k < 1 || k > n || M < 1) {
        throw std::invalid_argument(path + ": invalid model dimensions");
    }
    std::vector<Component> comps;
    comps.reserve(static_cast<std::size_t>(M));
    for (long m = 0; m < M; ++m) {
        auto comp_line = expect_line(in, "component", path);
        if (parse_long(comp_line.at(1)) != m) {
            throw std::invalid_argument(path + ": component indices out of order");
        }
        const double weight = parse_double(expect_line(in, "weight", path).at(1));
        const double length = parse_double(expect_line(in, "length", path).at(1));
        const Vec mean = parse_vector(expect_line(in, "mean", path), n, path + ": mean");
        const Mat cov =
            parse_matrix_row_major(expect_line(in, "cov", path), n, n, path + ": cov");
        comps.push_back(Component{GaussianModel(mean, cov), weight, length});
    }
    const long iterations = parse_long(expect_line(in, "iterations", path).at(1));
    const double final_distortion = parse_double(expect_line(in, "final_distortion", path).at(1));
    const auto seed = static_cast<std::uint64_t>(parse_long(expect_line(in, "seed", path).at(1)));
    const long removed = parse_long(expect_line(in, "removed_cells", path).at(1));

    // Codebook construction re-validates weights, lengths and the Kraft sum.
    return ModelFile{1,
                     static_cast<int>(n),
                     static_cast<int>(k),
                     Codebook(std::move(comps), kernel, mu),
                     static_cast<int>(iterations),
                     final_distortion,
                     seed,
                     static_cast<int>(removed)};
}

void save_embedding_spec(const std::string& path, const EmbeddingSpec& spec) {
    auto out = open_output(path);
    out << "geoquant-embedding 1\n";
    out << "n " << spec.n() << "\n";
    out << "k " << spec.k() << "\n";
    out << "charts " << spec.chart_count() << "\n";
    for (std::size_t l = 0; l < spec.chart_count(); ++l) {
        const auto& c = spec.chart(l);
        out << "chart " << l << "\n";
        out << "weight " << format_double(c.weight) << "\n";
        write_vector(out, "mu", c.mu);
        write_matrix_row_major(out, "a", c.A);
        write_matrix_row_major(out, "sigma", c.Sigma);
    }
    if (!out) throw std::runtime_error("failed writing embedding spec: " + path);
}

EmbeddingSpec load_embedding_spec(const std::string& path) {
    auto in = open_input(path);
    auto header = expect_line(in, "geoquant-embedding", path);
    if (header.size() != 2 || parse_long(header[1]) != 1) {
        throw std::invalid_argument(path + ": unsupported embedding schema version");
    }
    const long n = parse_long(expect_line(in, "n", path).at(1));
    const long k = parse_long(expect_line(in, "k", path).at(1));
    const long L = parse_long(expect_line(in, "charts", path).at(1));
    if (n < 1 || k < 1 || L < 1) {
        throw std::invalid_argument(path + ": invalid embedding dimensions");
    }
    std::vector<EmbeddingSpec::Chart> charts;
    charts.reserve(static_cast<std::size_t>(L));
    for (long l = 0; l < L; ++l) {
        auto chart_line = expect_line(in, "chart", path);
        if (parse_long(chart_line.at(1)) != l) {
            throw std::invalid_argument(path + ": chart indices out of order");
        }
        EmbeddingSpec::Chart c;
        c.weight = parse_double(expect_line(in, "weight", path).at(1));
        c.mu = parse_vector(expect_line(in, "mu", path), n, path + ": mu");
        c.A = parse_matrix_row_major(expect_line(in, "a", path), n, k, path + ": a");
        c.Sigma = parse_matrix_row_major(expect_line(in, "sigma", path), n, n, path + ": sigma");
        charts.push_back(std::move(c));
    }
    return EmbeddingSpec(std::move(charts), static_cast<int>(n), static_cast<int>(k));
}

void write_dataset_csv(const std::string& path, const Dataset& ds, bool include_latents) {
    auto out = open_output(path);
    const Eigen::Index n = ds.points.cols();
    const bool latents = include_latents && ds.has_latents;
    for (Eigen::Index j = 0; j < n; ++j) out << (j ? "," : "") << "x" << (j + 1);
    if (latents) {
        out << ",l";
        for (Eigen::Index j = 0; j < ds.latents.cols(); ++j) out << ",y" << (j + 1);
    }
    out << "\n";
    for (Eigen::Index i = 0; i < ds.points.rows(); ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out << (j ? "," : "") << format_double(ds.points(i, j));
        }
        if (latents) {
            out << "," << ds.labels(i);
            for (Eigen::Index j = 0; j < ds.latents.cols(); ++j) {
                out << "," << format_double(ds.latents(i, j));
            }
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("failed writing dataset: " + path);
}

Dataset read_dataset_csv(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty CSV");
    const auto header = split_csv_line(line);

    int n = 0;
    int label_col = -1;
    int latent_begin = -1;
    for (std::size_t j = 0; j < header.size(); ++j) {
        const std::string name = trim(header[j]);
        if (name == "x" + std::to_string(n + 1)) {
            if (static_cast<int>(j) != n) {
                throw std::invalid_argument(path + ": feature columns must come first");
            }
            ++n;
        } else if (name == "l") {
            label_col = static_cast<int>(j);
        } else if (!name.empty() && name[0] == 'y') {
            if (latent_begin < 0) latent_begin = static_cast<int>(j);
        } else {
            throw std::invalid_argument(path + ": unexpected column '" + name + "'");
        }
    }
    if (n == 0) throw std::invalid_argument(path + ": no feature columns x1..xn");

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::vector<std::vector<double>> latents;
    const int k = latent_begin >= 0 ? static_cast<int>(header.size()) - latent_begin : 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw std::invalid_argument(path + ": row width does not match header");
        }
        std::vector<double> x(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) x[static_cast<std::size_t>(j)] = parse_double(trim(fields[static_cast<std::size_t>(j)]));
        rows.push_back(std::move(x));
        if (label_col >= 0) {
            labels.push_back(static_cast<int>(parse_long(trim(fields[static_cast<std::size_t>(label_col)]))));
        }
        if (k > 0) {
            std::vector<double> y(static_cast<std::size_t>(k));
            for (int j = 0; j < k; ++j) {
                y[static_cast<std::size_t>(j)] =
                    parse_double(trim(fields[static_cast<std::size_t>(latent_begin + j)]));
            }
            latents.push_back(std::move(y));
        }
    }
    if (rows.empty()) throw std::invalid_argument(path + ": no data rows");

    Dataset ds;
    ds.points.resize(static_cast<Eigen::Index>(rows.size()), n);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < n; ++j) {
            ds.points(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
        }
    }
    ds.has_latents = label_col >= 0 && k > 0;
    if (ds.has_latents) {
        ds.labels.resize(static_cast<Eigen::Index>(labels.size()));
        for (std::size_t i = 0; i < labels.size(); ++i) {
            ds.labels(static_cast<Eigen::Index>(i)) = labels[i];
        }
        ds.latents.resize(static_cast<Eigen::Index>(latents.size()), k);
        for (std::size_t i = 0; i < latents.size(); ++i) {
            for (int j = 0; j < k; ++j) {
                ds.latents(static_cast<Eigen::Index>(i), j) = latents[i][static_cast<std::size_t>(j)];
            }
        }
    }
    return ds;
}

void write_reduced_csv(const std::string& path, const std::vector<ReducedPoint>& points) {
    if (points.empty()) throw std::invalid_argument("write_reduced_csv: no points");
    auto out = open_output(path);
    const Eigen::Index k = points.front().coords.size();
    out << "chart";
    for (Eigen::Index j = 0; j < k; ++j) out << ",u" << (j + 1);
    out << "\n";
    for (const auto& p : points) {
        if (p.coords.size() != k) {
            throw std::invalid_argument("write_reduced_csv: inconsistent coordinate size");
        }
        out << p.chart;
        for (Eigen::Index j = 0; j < k; ++j) out << "," << format_double(p.coords(j));
        out << "\n";
    }
    if (!out) throw std::runtime_error("failed writing reduced CSV: " + path);
}

std::vector<ReducedPoint> read_reduced_csv(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty CSV");
    const auto header = split_csv_line(line);
    if (header.empty() || trim(header[0]) != "chart") {
        throw std::invalid_argument(path + ": expected 'chart' as the first column");
    }
    const int k = static_cast<int>(header.size()) - 1;
    for (int j = 0; j < k; ++j) {
        if (trim(header[static_cast<std::size_t>(j + 1)]) != "u" + std::to_string(j + 1)) {
            throw std::invalid_argument(path + ": expected columns u1..uk");
        }
    }
    if (k < 1) throw std::invalid_argument(path + ": no coordinate columns");

    std::vector<ReducedPoint> points;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw std::invalid_argument(path + ": row width does not match header");
        }
        ReducedPoint p;
        p.chart = static_cast<int>(parse_long(trim(fields[0])));
        p.coords.resize(k);
        for (int j = 0; j < k; ++j) {
            p.coords(j) = parse_double(trim(fields[static_cast<std::size_t>(j + 1)]));
        }
        points.push_back(std::move(p));
    }
    if (points.empty()) throw std::invalid_argument(path + ": no data rows");
    return points;
}

std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path) {
    auto in = open_input(path);
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": expected key = value");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": expected key = value");
        }
        entries.emplace_back(key, value);
    }
    return entries;
}

} // namespace geoquant
