#include "topodim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "topodim/errors.hpp"
#include "topodim/rng.hpp"

namespace topodim {

PointCloud global_average_pool(const Tensor4& tensor) {
    const auto [n, h, w, c] = tensor.shape;
    if (n < 1 || h < 1 || w < 1 || c < 1)
        throw std::invalid_argument(
            "global_average_pool: all tensor dimensions must be >= 1");
    for (double v : tensor.data) {
        if (!std::isfinite(v))
            throw std::invalid_argument(
                "global_average_pool: tensor holds NaN/infinity");
    }

    const double cells = static_cast<double>(h) * static_cast<double>(w);
    std::vector<double> data(n * c, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x)
                for (std::size_t ch = 0; ch < c; ++ch)
                    data[s * c + ch] += tensor(s, y, x, ch);
        for (std::size_t ch = 0; ch < c; ++ch) data[s * c + ch] /= cells;
    }
    return PointCloud(n, c, std::move(data));
}

namespace {

constexpr std::uint64_t kProfilePhDimTag = 0x50484449; // "PHDI"

PointCloud load_source_cloud(const EmbeddingSource& source) {
    if (source.format == FileFormat::npy && npy_is_tensor(source.path))
        return global_average_pool(read_tensor_npy(source.path));
    return read_embedding_file(source.path, source.format);
}

PointCloud concat_clouds(std::vector<PointCloud> clouds) {
    if (clouds.size() == 1) return std::move(clouds.front());
    const std::size_t d = clouds.front().dim();
    std::vector<double> data;
    std::size_t n = 0;
    for (const PointCloud& c : clouds) {
        if (c.dim() != d)
            throw std::invalid_argument(
                "layer_profile: sources of one layer/class disagree on "
                "feature width");
        n += c.size();
        data.insert(data.end(), c.data().begin(), c.data().end());
    }
    return PointCloud(n, d, std::move(data));
}

} // namespace

LayerProfile layer_profile(std::span<const EmbeddingSource> sources,
                           const ProfileConfig& config) {
    if (sources.empty())
        throw std::invalid_argument("layer_profile: need at least one source");
    if (config.specs.empty())
        throw std::invalid_argument(
            "layer_profile: need at least one descriptor spec");
    if (config.batches < 1 || config.batch_size < 1)
        throw std::invalid_argument(
            "layer_profile: batches and batch_size must be >= 1");

    // layer index -> class label -> sources (ordered maps keep the
    // computation deterministic).
    std::map<int, std::map<std::string, std::vector<const EmbeddingSource*>>>
        grouped;
    for (const EmbeddingSource& s : sources)
        grouped[s.layer_index][s.class_label].push_back(&s);

    LayerProfile profile;
    profile.config = config;
    for (const EmbeddingSource& s : sources)
        profile.source_paths.push_back(s.path);

    const std::size_t layer_count = grouped.size();
    std::size_t ordinal = 0;
    double previous_depth = 0.0;

    for (const auto& [layer_index, classes] : grouped) {
        // Relative depth: every source of the layer must agree.
        std::optional<double> depth;
        for (const auto& [label, srcs] : classes) {
            for (const EmbeddingSource* s : srcs) {
                if (!s->relative_depth) continue;
                if (depth && *depth != *s->relative_depth)
                    throw std::invalid_argument(
                        "layer_profile: conflicting relative_depth values for "
                        "layer " +
                        std::to_string(layer_index));
                depth = *s->relative_depth;
            }
        }
        const double layer_depth =
            depth ? *depth
                  : static_cast<double>(ordinal + 1) /
                        static_cast<double>(layer_count);
        if (ordinal > 0 && layer_depth <= previous_depth)
            throw std::invalid_argument(
                "layer_profile: relative_depth must increase strictly with "
                "layer_index (violated at layer " +
                std::to_string(layer_index) + ")");
        previous_depth = layer_depth;
        ++ordinal;

        std::vector<double> class_descriptor_sums(config.specs.size(), 0.0);
        std::vector<double> class_count_sums(config.specs.size(), 0.0);
        double class_beta_sum = 0.0;
        double class_r2_sum = 0.0;
        std::size_t class_total = 0;

        for (const auto& [label, srcs] : classes) {
            std::vector<PointCloud> parts;
            parts.reserve(srcs.size());
            for (const EmbeddingSource* s : srcs)
                parts.push_back(load_source_cloud(*s));
            const PointCloud cloud = concat_clouds(std::move(parts));

            std::size_t batch = config.batch_size;
            if (cloud.size() < batch) {
                if (!config.shrink_batches)
                    throw std::invalid_argument(
                        "layer_profile: class '" + label + "' at layer " +
                        std::to_string(layer_index) + " has " +
                        std::to_string(cloud.size()) +
                        " points, fewer than batch_size " +
                        std::to_string(batch) +
                        " (enable shrink_batches to proceed)");
                batch = cloud.size();
                profile.warnings.push_back(
                    "layer " + std::to_string(layer_index) + " class '" +
                    label + "': batch shrunk to " + std::to_string(batch));
            }

            std::vector<double> batch_descriptor_sums(config.specs.size(), 0.0);
            std::vector<double> batch_count_sums(config.specs.size(), 0.0);
            double batch_beta_sum = 0.0;
            double batch_r2_sum = 0.0;

            for (std::size_t b = 0; b < config.batches; ++b) {
                const std::uint64_t batch_seed =
                    derive_seed(config.seed, fnv1a64(label), b);
                const auto idx =
                    subsample_indices(cloud.size(), batch, batch_seed);
                const PointCloud sample = gather_rows(cloud, idx);

                for (std::size_t s = 0; s < config.specs.size(); ++s) {
                    const DescriptorValue v = cloud_descriptor(
                        sample, config.specs[s], config.diagram);
                    batch_descriptor_sums[s] += v.value;
                    batch_count_sums[s] += v.n_intervals;
                }
                if (config.phdim.enabled) {
                    SampleSchedule schedule =
                        config.phdim.schedule
                            ? *config.phdim.schedule
                            : SampleSchedule::logspaced(sample.size());
                    schedule.seed = derive_seed(config.seed, fnv1a64(label), b,
                                                kProfilePhDimTag);
                    const PhDimEstimate est =
                        ph_dim(sample, config.phdim.dim, config.phdim.alpha,
                               schedule, config.diagram);
                    batch_beta_sum += est.beta;
                    batch_r2_sum += est.r_squared;
                }
            }

            const double b = static_cast<double>(config.batches);
            for (std::size_t s = 0; s < config.specs.size(); ++s) {
                class_descriptor_sums[s] += batch_descriptor_sums[s] / b;
                class_count_sums[s] += batch_count_sums[s] / b;
            }
            class_beta_sum += batch_beta_sum / b;
            class_r2_sum += batch_r2_sum / b;
            ++class_total;
        }

        LayerResult result;
        result.layer_index = layer_index;
        result.relative_depth = layer_depth;
        const double nc = static_cast<double>(class_total);
        for (std::size_t s = 0; s < config.specs.size(); ++s) {
            DescriptorValue v;
            v.spec = config.specs[s];
            v.value = class_descriptor_sums[s] / nc;
            v.n_intervals = class_count_sums[s] / nc;
            result.descriptors.push_back(v);
        }
        if (config.phdim.enabled) {
            // Aggregate by mean beta so that dimension = alpha/(1 - beta)
            // stays an exact identity on the stored fields.
            PowerLawFit fit;
            fit.slope = class_beta_sum / nc;
            fit.r_squared = class_r2_sum / nc;
            result.phdim = phdim_from_fit(config.phdim.alpha, config.phdim.dim,
                                          fit, {});
        }
        profile.layers.push_back(std::move(result));
    }

    return profile;
}

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("pearson_r: length mismatch");
    if (xs.size() < 2)
        throw std::invalid_argument("pearson_r: need at least 2 samples");

    const auto n = static_cast<double>(xs.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= n;
    mean_y /= n;

    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mean_x;
        const double dy = ys[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw estimation_error("pearson_r: degenerate input, zero variance");
    return sxy / std::sqrt(sxx * syy);
}

GeneralizationReport
generalization_report(std::span<const ModelRecord> records) {
    if (records.size() < 3)
        throw std::invalid_argument(
            "generalization_report: need at least 3 records");

    const DescriptorSpec& spec = records.front().last_layer_descriptor.spec;
    for (const ModelRecord& r : records) {
        if (!(r.last_layer_descriptor.spec == spec))
            throw std::invalid_argument(
                "generalization_report: records mix different descriptor "
                "specs");
        if (!(r.test_accuracy >= 0.0 && r.test_accuracy <= 1.0))
            throw std::invalid_argument(
                "generalization_report: test_accuracy of '" + r.model_id +
                "' outside [0, 1]");
    }

    std::vector<double> descriptors, accuracies;
    descriptors.reserve(records.size());
    accuracies.reserve(records.size());
    for (const ModelRecord& r : records) {
        descriptors.push_back(r.last_layer_descriptor.value);
        accuracies.push_back(r.test_accuracy);
    }

    GeneralizationReport report;
    report.records.assign(records.begin(), records.end());
    report.pearson = pearson_r(descriptors, accuracies);
    report.weak_predictor = std::abs(report.pearson) < 0.5;

    // OLS trend of accuracy on descriptor (pearson_r already rejected a
    // zero-variance descriptor axis).
    const auto n = static_cast<double>(records.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        mean_x += descriptors[i];
        mean_y += accuracies[i];
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const double dx = descriptors[i] - mean_x;
        sxx += dx * dx;
        sxy += dx * (accuracies[i] - mean_y);
    }
    report.trend.slope = sxy / sxx;
    report.trend.intercept = mean_y - report.trend.slope * mean_x;
    return report;
}

namespace {

using json = nlohmann::json;

json parse_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("failed to load '" + path.string() +
                       "': cannot open file");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw io_error("failed to load '" + path.string() +
                       "': " + e.what());
    }
    return doc;
}

DescriptorSpec spec_from_json(const json& j) {
    DescriptorSpec spec;
    spec.dim = j.value("i", 0);
    spec.alpha = j.value("alpha", 1.0);
    spec.averaged = j.value("averaged", false);
    spec.include_zero_length = j.value("include_zero_length", true);
    return spec;
}

DiagramConfig diagram_from_json(const json& j) {
    DiagramConfig config;
    if (j.contains("metric"))
        config.metric = metric_from_string(j.at("metric").get<std::string>());
    config.rips.max_dim = j.value("max_dim", 1);
    if (j.contains("threshold") && !j.at("threshold").is_string())
        config.rips.threshold = j.at("threshold").get<double>();
    // the string form must be "auto"
    if (j.contains("threshold") && j.at("threshold").is_string() &&
        j.at("threshold").get<std::string>() != "auto")
        throw std::invalid_argument(
            "threshold must be a number or \"auto\"");
    if (j.contains("simplex_cap"))
        config.rips.simplex_cap = j.at("simplex_cap").get<std::size_t>();
    return config;
}

std::filesystem::path resolve_relative(const std::filesystem::path& base,
                                       const std::string& raw) {
    const std::filesystem::path p(raw);
    return p.is_absolute() ? p : base / p;
}

} // namespace

ProfileManifest load_manifest(const std::filesystem::path& path) {
    const json doc = parse_json_file(path);
    const std::filesystem::path base = path.parent_path();

    ProfileManifest manifest;
    try {
        if (doc.contains("seed")) {
            manifest.config.seed = doc.at("seed").get<std::uint64_t>();
            manifest.has_seed = true;
        }
        manifest.config.batch_size = doc.value("batch_size", std::size_t{300});
        manifest.config.batches = doc.value("batches", std::size_t{5});
        manifest.config.shrink_batches = doc.value("shrink_batches", false);

        if (doc.contains("descriptors")) {
            manifest.config.specs.clear();
            for (const json& j : doc.at("descriptors"))
                manifest.config.specs.push_back(spec_from_json(j));
        }
        if (doc.contains("persistence"))
            manifest.config.diagram = diagram_from_json(doc.at("persistence"));
        if (doc.contains("phdim")) {
            const json& j = doc.at("phdim");
            manifest.config.phdim.enabled = j.value("enabled", true);
            manifest.config.phdim.dim = j.value("i", 0);
            manifest.config.phdim.alpha = j.value("alpha", 1.0);
            if (j.contains("sizes")) {
                SampleSchedule schedule;
                schedule.sizes =
                    j.at("sizes").get<std::vector<std::size_t>>();
                schedule.repeats = j.value("repeats", std::size_t{5});
                manifest.config.phdim.schedule = std::move(schedule);
            }
        }

        if (!doc.contains("sources") || doc.at("sources").empty())
            throw std::invalid_argument("manifest lists no sources");
        for (const json& j : doc.at("sources")) {
            EmbeddingSource source;
            source.path =
                resolve_relative(base, j.at("path").get<std::string>())
                    .string();
            source.format =
                j.contains("format")
                    ? format_from_string(j.at("format").get<std::string>())
                    : detect_format(source.path);
            source.layer_index = j.at("layer_index").get<int>();
            if (j.contains("relative_depth"))
                source.relative_depth = j.at("relative_depth").get<double>();
            source.class_label = j.value("class_label", std::string{});
            manifest.sources.push_back(std::move(source));
        }
    } catch (const json::exception& e) {
        throw io_error("failed to load '" + path.string() +
                       "': " + e.what());
    }
    return manifest;
}

RecordsFile load_records(const std::filesystem::path& path,
                         std::optional<std::uint64_t> seed_override,
                         std::uint64_t fallback_seed) {
    const json doc = parse_json_file(path);
    const std::filesystem::path base = path.parent_path();

    RecordsFile file;
    file.seed = fallback_seed;
    try {
        const DescriptorSpec spec = doc.contains("spec")
                                        ? spec_from_json(doc.at("spec"))
                                        : DescriptorSpec{};

        std::size_t per_class = 350;
        bool pooled = false;
        DiagramConfig diagram;
        if (doc.contains("compute")) {
            const json& c = doc.at("compute");
            per_class = c.value("per_class_examples", std::size_t{350});
            pooled = c.value("pooled", false);
            diagram = diagram_from_json(c);
            if (c.contains("seed"))
                file.seed = c.at("seed").get<std::uint64_t>();
        }
        if (seed_override) file.seed = *seed_override;

        if (!doc.contains("records"))
            throw std::invalid_argument("records file lists no records");

        std::size_t record_ordinal = 0;
        for (const json& j : doc.at("records")) {
            ModelRecord record;
            record.model_id = j.at("model_id").get<std::string>();
            record.test_accuracy = j.at("test_accuracy").get<double>();
            record.last_layer_descriptor.spec = spec;

            if (j.contains("descriptor_value")) {
                record.last_layer_descriptor.value =
                    j.at("descriptor_value").get<double>();
                record.last_layer_descriptor.n_intervals =
                    j.value("n_intervals", 0.0);
            } else if (j.contains("embeddings")) {
                // Per class: subsample per_class examples of the final
                // representation, then class-average (or pool first).
                file.sampled = true;
                std::vector<PointCloud> class_clouds;
                for (const json& e : j.at("embeddings")) {
                    const std::string p =
                        resolve_relative(base, e.at("path").get<std::string>())
                            .string();
                    const FileFormat fmt =
                        e.contains("format")
                            ? format_from_string(
                                  e.at("format").get<std::string>())
                            : detect_format(p);
                    EmbeddingSource src;
                    src.path = p;
                    src.format = fmt;
                    class_clouds.push_back(load_source_cloud(src));
                }
                if (class_clouds.empty())
                    throw std::invalid_argument("record '" + record.model_id +
                                                "' lists no embeddings");
                std::vector<PointCloud> sampled;
                std::size_t class_ordinal = 0;
                for (const PointCloud& cloud : class_clouds) {
                    if (cloud.size() < per_class)
                        throw std::invalid_argument(
                            "record '" + record.model_id + "': class cloud " +
                            std::to_string(class_ordinal) + " has " +
                            std::to_string(cloud.size()) +
                            " points, fewer than per_class_examples " +
                            std::to_string(per_class));
                    sampled.push_back(subsample(
                        cloud, per_class,
                        derive_seed(file.seed, record_ordinal,
                                    class_ordinal)));
                    ++class_ordinal;
                }
                if (pooled) {
                    const PointCloud merged = concat_clouds(std::move(sampled));
                    record.last_layer_descriptor =
                        cloud_descriptor(merged, spec, diagram);
                } else {
                    record.last_layer_descriptor = class_averaged_descriptor(
                        sampled, spec, diagram);
                }
            } else {
                throw std::invalid_argument(
                    "record '" + record.model_id +
                    "' has neither descriptor_value nor embeddings");
            }
            file.records.push_back(std::move(record));
            ++record_ordinal;
        }
    } catch (const json::exception& e) {
        throw io_error("failed to load '" + path.string() +
                       "': " + e.what());
    }
    return file;
}

} // namespace topodim
