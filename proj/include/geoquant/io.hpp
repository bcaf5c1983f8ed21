// Text serialization: model files, embedding-spec files, dataset and
// reduced-point CSV, and the flat key=value configuration format. All
// floating-point output uses 17 significant digits so save/load/save
// round-trips are byte-identical.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "geoquant/codebook.hpp"
#include "geoquant/nldr.hpp"
#include "geoquant/synth.hpp"
#include "geoquant/types.hpp"

namespace geoquant {

struct ModelFile {
    int schema_version = 1;
    int n = 0;
    int k = 0;
    Codebook codebook;
    // fit metadata
    int iterations = 0;
    double final_distortion = 0.0;
    std::uint64_t seed = 0;
    int removed_cells = 0;
};

/// %.17g rendering; parses back to the identical double.
std::string format_double(double v);

/// Strict double parser; throws on trailing garbage.
double parse_double(const std::string& s);

void save_model(const std::string& path, const ModelFile& model);

/// Loads and re-validates every codebook invariant (SPD covariances, weight
/// normalization, Kraft sum).
ModelFile load_model(const std::string& path);

void save_embedding_spec(const std::string& path, const EmbeddingSpec& spec);
EmbeddingSpec load_embedding_spec(const std::string& path);

/// Dataset CSV: header x1..xn plus optional latent columns l,y1..yk.
void write_dataset_csv(const std::string& path, const Dataset& ds, bool include_latents);
Dataset read_dataset_csv(const std::string& path);

/// Reduced-point CSV: header chart,u1..uk.
void write_reduced_csv(const std::string& path, const std::vector<ReducedPoint>& points);
std::vector<ReducedPoint> read_reduced_csv(const std::string& path);

/// Flat "section.key = value" configuration lines; '#' starts a comment.
/// Returned in file order; key validation is the caller's job.
std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path);

} // namespace geoquant
