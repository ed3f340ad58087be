// Embedding ingestion, global average pooling, per-layer profiles across
// network depth, and the generalization-correlation report.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topodim/descriptors.hpp"
#include "topodim/dimension.hpp"
#include "topodim/geometry.hpp"
#include "topodim/io.hpp"

namespace topodim {

// One embedding dump: a layer's representation of one class.
struct EmbeddingSource {
    std::string path;
    FileFormat format = FileFormat::csv;
    int layer_index = 0;
    // Defaults to (layer ordinal + 1) / layer count when absent.
    std::optional<double> relative_depth;
    std::string class_label;
};

// output[s][k] = mean over the h x w spatial grid of tensor[s][.][.][k].
PointCloud global_average_pool(const Tensor4& tensor);

struct PhDimSettings {
    bool enabled = true;
    int dim = 0;
    double alpha = 1.0;
    // Falls back to a log-spaced schedule sized to the batch.
    std::optional<SampleSchedule> schedule;
};

struct ProfileConfig {
    std::vector<DescriptorSpec> specs{DescriptorSpec{}};
    PhDimSettings phdim;
    DiagramConfig diagram;
    std::size_t batch_size = 300;
    std::size_t batches = 5;
    std::uint64_t seed = 0;
    // When a class has fewer points than batch_size: false = error,
    // true = shrink the batch to the class size (recorded as a warning).
    bool shrink_batches = false;
};

struct LayerResult {
    int layer_index = 0;
    double relative_depth = 0.0;
    std::vector<DescriptorValue> descriptors;
    std::optional<PhDimEstimate> phdim;
};

struct LayerProfile {
    std::vector<LayerResult> layers;
    ProfileConfig config;
    std::vector<std::string> source_paths;
    std::vector<std::string> warnings;
};

// Per layer: per class, draw `batches` subsamples of `batch_size` points,
// compute the descriptors (and PH_dim) of each batch, average across
// batches, then across classes.
//
// Batch index draws are keyed by (seed, class label, batch ordinal) only —
// not by layer — mirroring a batch of examples flowing through every layer
// of a network; layers with the same class sizes therefore sample the same
// member rows.
LayerProfile layer_profile(std::span<const EmbeddingSource> sources,
                           const ProfileConfig& config);

// Sample Pearson correlation coefficient. Requires equal lengths >= 2;
// throws estimation_error when either side has zero variance.
double pearson_r(std::span<const double> xs, std::span<const double> ys);

struct ModelRecord {
    std::string model_id;
    double test_accuracy = 0.0; // in [0, 1]
    DescriptorValue last_layer_descriptor;
};

struct TrendLine {
    double slope = 0.0;
    double intercept = 0.0;
};

struct GeneralizationReport {
    std::vector<ModelRecord> records;
    double pearson = 0.0;
    TrendLine trend; // accuracy fitted against the descriptor
    bool weak_predictor = false;
};

// Requires >= 3 records computed under one DescriptorSpec. |r| < 0.5 is
// flagged as a weak predictor.
GeneralizationReport generalization_report(std::span<const ModelRecord> records);

// ---- manifest / records files ------------------------------------------

struct ProfileManifest {
    std::vector<EmbeddingSource> sources;
    ProfileConfig config;
    bool has_seed = false; // whether the file pinned a seed
};

// JSON manifest; relative source paths resolve against the manifest's
// directory. See README for the schema.
ProfileManifest load_manifest(const std::filesystem::path& path);

struct RecordsFile {
    std::vector<ModelRecord> records;
    std::uint64_t seed = 0;
    bool sampled = false; // any record was computed from embeddings
};

// JSON records; entries either carry a precomputed descriptor value or
// per-class embedding files from which the descriptor is computed
// (class-averaged by default, pooled on request; 350 examples per class
// unless overridden). Seed precedence: seed_override, then the file's
// compute.seed, then fallback_seed.
RecordsFile load_records(const std::filesystem::path& path,
                         std::optional<std::uint64_t> seed_override = {},
                         std::uint64_t fallback_seed = 0);

} // namespace topodim
