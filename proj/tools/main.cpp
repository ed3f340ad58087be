// topodim command-line front end. Every subcommand is reproducible: with
// identical flags and --seed the primary output is byte-identical.
//
// Exit codes: 0 success, 1 invalid input or arguments, 2 resource cap
// exceeded. Errors print one line to stderr as "error: <category>: <msg>".

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "topodim/errors.hpp"
#include "topodim/io.hpp"
#include "topodim/parallel.hpp"
#include "topodim/pipeline.hpp"
#include "topodim/reports.hpp"
#include "topodim/synthetic.hpp"

namespace {

using namespace topodim;

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string output;
    std::string format = "json";
};

// When no --seed is given, sampling commands draw one and print it in the
// output for replay.
std::uint64_t resolve_seed(const GlobalOptions& global) {
    if (global.seed) return *global.seed;
    std::random_device device;
    return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

void emit(const GlobalOptions& global, const std::string& text) {
    if (global.output.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(global.output, std::ios::binary);
    if (!out)
        throw io_error("cannot open '" + global.output + "' for writing");
    out << text;
    if (!out) throw io_error("error writing to '" + global.output + "'");
}

void emit_json(const GlobalOptions& global, const ojson& doc) {
    emit(global, doc.dump(2) + "\n");
}

std::optional<double> parse_threshold(const std::string& text) {
    if (text == "auto") return std::nullopt;
    try {
        std::size_t consumed = 0;
        const double value = std::stod(text, &consumed);
        if (consumed != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw std::invalid_argument("--threshold must be a number or 'auto'");
    }
}

std::string single_line(std::string text) {
    std::replace(text.begin(), text.end(), '\n', ' ');
    std::replace(text.begin(), text.end(), '\r', ' ');
    return text;
}

int run(int argc, char** argv) {
    CLI::App app{"topodim: persistent-homology descriptors and intrinsic "
                 "dimension of point clouds"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--seed", global.seed,
                   "RNG seed; omitted = random, printed in the output");
    app.add_option("--threads", global.threads,
                   "bound on worker threads (default: available cores)");
    app.add_option("--output", global.output,
                   "write the primary output to this path (default: stdout)");
    app.add_option("--format", global.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();

    // persistence
    auto* persistence_cmd =
        app.add_subcommand("persistence", "Vietoris-Rips persistence diagram");
    std::string persistence_input;
    std::string persistence_metric = "euclidean";
    int persistence_max_dim = 1;
    std::string persistence_threshold = "auto";
    persistence_cmd->add_option("input", persistence_input, "point-cloud file")
        ->required();
    persistence_cmd->add_option("--metric", persistence_metric, "distance")
        ->check(CLI::IsMember({"euclidean", "manhattan", "chebyshev",
                               "cosine"}))
        ->capture_default_str();
    persistence_cmd->add_option("--max-dim", persistence_max_dim,
                                "highest homology dimension")
        ->capture_default_str();
    persistence_cmd->add_option("--threshold", persistence_threshold,
                                "filtration truncation or 'auto'")
        ->capture_default_str();

    // descriptor
    auto* descriptor_cmd =
        app.add_subcommand("descriptor", "lifespan power sum of a cloud");
    std::string descriptor_input;
    int descriptor_i = 0;
    double descriptor_alpha = 1.0;
    bool descriptor_averaged = false;
    descriptor_cmd->add_option("input", descriptor_input, "point-cloud file")
        ->required();
    descriptor_cmd->add_option("--i", descriptor_i, "homology dimension")
        ->capture_default_str();
    descriptor_cmd->add_option("--alpha", descriptor_alpha, "weight exponent")
        ->capture_default_str();
    descriptor_cmd->add_flag("--averaged", descriptor_averaged,
                             "divide by the interval count");

    // phdim
    auto* phdim_cmd = app.add_subcommand(
        "phdim", "persistent-homology fractal dimension estimate");
    std::string phdim_input;
    int phdim_i = 0;
    double phdim_alpha = 1.0;
    std::vector<std::size_t> phdim_sizes;
    std::size_t phdim_repeats = 5;
    phdim_cmd->add_option("input", phdim_input, "point-cloud file")->required();
    phdim_cmd->add_option("--i", phdim_i, "homology dimension")
        ->capture_default_str();
    phdim_cmd->add_option("--alpha", phdim_alpha, "weight exponent")
        ->capture_default_str();
    phdim_cmd->add_option("--sizes", phdim_sizes,
                          "subsample sizes (default: log-spaced 64..4096)")
        ->delimiter(',');
    phdim_cmd->add_option("--repeats", phdim_repeats, "draws per size")
        ->capture_default_str();

    // id
    auto* id_cmd =
        app.add_subcommand("id", "comparison intrinsic-dimension estimators");
    std::string id_input;
    std::string id_method;
    std::size_t id_k = 10;
    id_cmd->add_option("input", id_input, "point-cloud file")->required();
    id_cmd->add_option("--method", id_method, "estimator")
        ->check(CLI::IsMember({"twonn", "mle", "corrdim"}))
        ->required();
    id_cmd->add_option("--k", id_k, "neighbor count (mle)")
        ->capture_default_str();

    // profile
    auto* profile_cmd =
        app.add_subcommand("profile", "per-layer descriptor/PH_dim profile");
    std::string profile_manifest;
    profile_cmd->add_option("--manifest", profile_manifest, "manifest file")
        ->required();

    // correlate
    auto* correlate_cmd = app.add_subcommand(
        "correlate", "generalization report over model records");
    std::string correlate_records;
    correlate_cmd->add_option("--records", correlate_records, "records file")
        ->required();

    // synth
    auto* synth_cmd =
        app.add_subcommand("synth", "synthetic point-cloud generator");
    std::string synth_manifold;
    int synth_dim = 0;
    int synth_ambient = 0;
    std::size_t synth_n = 1000;
    synth_cmd->add_option("--manifold", synth_manifold, "manifold kind")
        ->check(CLI::IsMember({"segment", "square", "cube", "circle",
                               "sphere"}))
        ->required();
    synth_cmd->add_option("--dim", synth_dim,
                          "intrinsic dimension (cube, sphere)");
    synth_cmd->add_option("--ambient-dim", synth_ambient,
                          "embed into this many dimensions");
    synth_cmd->add_option("--n", synth_n, "point count")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
        std::cerr << "error: invalid-argument: " << single_line(e.what())
                  << "\n";
        return 1;
    }
    set_thread_budget(global.threads);
    const bool csv = global.format == "csv";

    if (persistence_cmd->parsed()) {
        const PointCloud cloud = read_embedding_file(persistence_input);
        const DistanceMatrix dist =
            pairwise_distances(cloud, metric_from_string(persistence_metric));
        RipsParams params;
        params.max_dim = persistence_max_dim;
        params.threshold = parse_threshold(persistence_threshold);
        const PersistenceDiagram diagram = rips_persistence(dist, params);
        if (csv) {
            emit(global, diagram_csv(diagram));
        } else {
            ojson doc = diagram_json(diagram);
            doc["n_points"] = cloud.size();
            doc["metric"] = persistence_metric;
            emit_json(global, doc);
        }
        return 0;
    }

    if (descriptor_cmd->parsed()) {
        const PointCloud cloud = read_embedding_file(descriptor_input);
        DescriptorSpec spec;
        spec.dim = descriptor_i;
        spec.alpha = descriptor_alpha;
        spec.averaged = descriptor_averaged;
        const DescriptorValue value = cloud_descriptor(cloud, spec);
        emit(global, csv ? descriptor_csv(value)
                         : descriptor_json(value).dump(2) + "\n");
        return 0;
    }

    if (phdim_cmd->parsed()) {
        const PointCloud cloud = read_embedding_file(phdim_input);
        const std::uint64_t seed = resolve_seed(global);
        SampleSchedule schedule;
        if (phdim_sizes.empty()) {
            schedule = SampleSchedule::logspaced(cloud.size());
        } else {
            schedule.sizes = phdim_sizes;
        }
        schedule.repeats = phdim_repeats;
        schedule.seed = seed;
        const PhDimEstimate estimate =
            ph_dim(cloud, phdim_i, phdim_alpha, schedule);
        if (csv) {
            emit(global, phdim_csv(estimate));
        } else {
            ojson doc = phdim_json(estimate);
            doc["seed"] = seed;
            doc["sizes"] = schedule.sizes;
            doc["repeats"] = schedule.repeats;
            emit_json(global, doc);
        }
        return 0;
    }

    if (id_cmd->parsed()) {
        const PointCloud cloud = read_embedding_file(id_input);
        IdEstimate estimate;
        if (id_method == "twonn")
            estimate = twonn(cloud);
        else if (id_method == "mle")
            estimate = mle_id(cloud, id_k);
        else
            estimate = correlation_dimension(cloud);
        emit(global, csv ? id_csv(estimate) : id_json(estimate).dump(2) + "\n");
        return 0;
    }

    if (profile_cmd->parsed()) {
        ProfileManifest manifest = load_manifest(profile_manifest);
        if (global.seed)
            manifest.config.seed = *global.seed;
        else if (!manifest.has_seed)
            manifest.config.seed = resolve_seed(global);
        const LayerProfile profile =
            layer_profile(manifest.sources, manifest.config);
        if (csv) {
            emit(global, "# seed=" + std::to_string(profile.config.seed) +
                             "\n" + profile_csv(profile));
        } else {
            emit_json(global, profile_json(profile));
        }
        return 0;
    }

    if (correlate_cmd->parsed()) {
        const RecordsFile file =
            load_records(correlate_records, global.seed, resolve_seed(global));
        const GeneralizationReport report = generalization_report(file.records);
        if (csv) {
            std::string text = correlation_csv(report);
            if (file.sampled)
                text = "# seed=" + std::to_string(file.seed) + "\n" + text;
            emit(global, text);
        } else {
            ojson doc = correlation_json(report);
            if (file.sampled) doc["seed"] = file.seed;
            emit_json(global, doc);
        }
        return 0;
    }

    if (synth_cmd->parsed()) {
        if (global.output.empty())
            throw std::invalid_argument(
                "synth requires --output for the generated cloud");
        const std::uint64_t seed = resolve_seed(global);
        SynthParams params;
        params.manifold = manifold_from_string(synth_manifold);
        params.n = synth_n;
        params.dim = synth_dim;
        params.ambient_dim = synth_ambient;
        params.seed = seed;
        const PointCloud cloud = synthesize(params);
        write_cloud_csv(global.output, cloud);
        const ojson summary{{"manifold", synth_manifold},
                            {"n", cloud.size()},
                            {"d", cloud.dim()},
                            {"seed", seed},
                            {"output", global.output}};
        std::cout << summary.dump(2) << "\n";
        return 0;
    }

    return 1;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const topodim::resource_limit_error& e) {
        std::cerr << "error: resource-limit: " << single_line(e.what()) << "\n";
        return 2;
    } catch (const topodim::io_error& e) {
        std::cerr << "error: io: " << single_line(e.what()) << "\n";
        return 1;
    } catch (const topodim::estimation_error& e) {
        std::cerr << "error: estimation: " << single_line(e.what()) << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: invalid-argument: " << single_line(e.what())
                  << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << single_line(e.what()) << "\n";
        return 1;
    }
}
