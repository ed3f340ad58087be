// Acceptance suite: runs every acceptance criterion at its stated
// tolerance and prints one PASS/FAIL line per criterion. Exits nonzero if
// any criterion fails.

#include <unistd.h>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "topodim/descriptors.hpp"
#include "topodim/dimension.hpp"
#include "topodim/io.hpp"
#include "topodim/persistence.hpp"
#include "topodim/pipeline.hpp"
#include "topodim/rng.hpp"
#include "topodim/synthetic.hpp"

using namespace topodim;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;
fs::path g_workdir;

void report(int criterion, const std::string& name, bool ok,
            const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion << " ("
              << name << "): " << detail << "\n";
    if (!ok) ++g_failures;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double value) {
    std::ostringstream out;
    out.precision(6);
    out << value;
    return out.str();
}

int run_cli(const std::string& args, const fs::path& stdout_to = {}) {
    std::string command = std::string(TOPODIM_CLI_PATH) + " " + args;
    if (!stdout_to.empty()) command += " > " + stdout_to.string();
    command += " 2>/dev/null";
    return WEXITSTATUS(std::system(command.c_str()));
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// 1. E_1^0 from h0_persistence equals an independent Kruskal MST length
//    within 1e-9 on 100 random clouds, n = 200, d in {2, 8, 32}; < 10 s.
void criterion_1() {
    const auto start = Clock::now();
    const std::size_t dims[3] = {2, 8, 32};
    double worst = 0.0;
    for (int c = 0; c < 100; ++c) {
        const std::size_t d = dims[c % 3];
        const PointCloud cloud =
            oracles::random_cloud(200, d, 10'000 + static_cast<std::uint64_t>(c));
        const DistanceMatrix dist = pairwise_distances(cloud);

        DescriptorSpec spec; // i = 0, alpha = 1
        const double e10 = e_alpha(h0_persistence(dist), spec).value;
        double kruskal = 0.0;
        for (double w : oracles::kruskal_mst_weights(dist)) kruskal += w;
        worst = std::max(worst, std::fabs(e10 - kruskal));
    }
    const double elapsed = seconds_since(start);
    const bool ok = worst < 1e-9 && elapsed < 10.0;
    report(1, "MST identity", ok,
           "max |E_1^0 - Kruskal| = " + fmt(worst) + " over 100 clouds in " +
               fmt(elapsed) + " s");
}

// 2. rips_persistence (max_dim = 2) matches the naive textbook reduction
//    interval-for-interval on 200 random clouds with n <= 12; < 60 s.
void criterion_2() {
    const auto start = Clock::now();
    int mismatches = 0;
    for (int c = 0; c < 200; ++c) {
        const std::size_t n = 3 + static_cast<std::size_t>(c) % 10; // 3..12
        const std::size_t d = 2 + static_cast<std::size_t>(c) % 3;
        const PointCloud cloud =
            oracles::random_cloud(n, d, 20'000 + static_cast<std::uint64_t>(c));
        const DistanceMatrix dist = pairwise_distances(cloud);
        const double threshold = enclosing_radius(dist);

        RipsParams params;
        params.max_dim = 2;
        params.threshold = threshold;
        const PersistenceDiagram diagram = rips_persistence(dist, params);
        const auto expected = oracles::naive_persistence(dist, 2, threshold);

        for (int dim = 0; dim <= 2; ++dim) {
            const auto& got = diagram.intervals(dim);
            if (oracles::sorted_pairs({got.begin(), got.end()}, dim) !=
                oracles::sorted_pairs(expected, dim))
                ++mismatches;
        }
    }
    const double elapsed = seconds_since(start);
    const bool ok = mismatches == 0 && elapsed < 60.0;
    report(2, "reduction oracle", ok,
           std::to_string(mismatches) + " mismatched diagrams over 200 clouds in " +
               fmt(elapsed) + " s");
}

// 3. 20 equally spaced unit-circle points: one dominant H1 bar (> 5x all
//    others) born at 2 sin(pi/20) +- 1e-9; betti mid-scale = (1, 1).
void criterion_3() {
    const PointCloud cloud = regular_polygon(20);
    const DistanceMatrix dist = pairwise_distances(cloud);
    RipsParams params;
    params.max_dim = 1;
    const PersistenceDiagram diagram = rips_persistence(dist, params);

    double best = 0.0, second = 0.0, best_birth = 0.0, best_death = 0.0;
    for (const auto& interval : diagram.intervals(1)) {
        const double len = interval.infinite() ? -1.0 : interval.lifespan();
        if (len > best) {
            second = best;
            best = len;
            best_birth = interval.birth;
            best_death = interval.death;
        } else if (len > second) {
            second = len;
        }
    }
    const double expected_birth = 2.0 * std::sin(std::numbers::pi / 20.0);
    const double mid = 0.5 * (best_birth + best_death);
    const bool ok = best > 5.0 * second &&
                    std::fabs(best_birth - expected_birth) < 1e-9 &&
                    betti_at(diagram, mid, 0) == 1 &&
                    betti_at(diagram, mid, 1) == 1;
    report(3, "circle topology", ok,
           "dominant H1 bar [" + fmt(best_birth) + ", " + fmt(best_death) +
               ") vs next lifespan " + fmt(second) + "; betti mid = (" +
               std::to_string(betti_at(diagram, mid, 0)) + ", " +
               std::to_string(betti_at(diagram, mid, 1)) + ")");
}

// 4. Uniform unit-square samples, sizes 64..4096, alpha = 1: fitted beta in
//    [0.42, 0.58] and PH_dim in [1.75, 2.25] over 5 seeds; < 2 min.
void criterion_4() {
    const auto start = Clock::now();
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SynthParams params;
        params.manifold = ManifoldKind::square;
        params.n = 4096;
        params.seed = 1000 + seed;
        const PointCloud cloud = synthesize(params);
        SampleSchedule schedule = SampleSchedule::logspaced(cloud.size());
        schedule.seed = seed;
        const PhDimEstimate estimate = ph_dim(cloud, 0, 1.0, schedule);
        if (!(estimate.beta >= 0.42 && estimate.beta <= 0.58 &&
              estimate.dimension >= 1.75 && estimate.dimension <= 2.25))
            ok = false;
        if (!detail.empty()) detail += ", ";
        detail += "beta=" + fmt(estimate.beta) +
                  "/dim=" + fmt(estimate.dimension);
    }
    const double elapsed = seconds_since(start);
    ok = ok && elapsed < 120.0;
    report(4, "Steele scaling", ok, detail + " in " + fmt(elapsed) + " s");
}

// 5. PH_dim, TwoNN, MLE(10), CorrDim within +-20% of truth on the uniform
//    segment and square (n = 2000); 8-D cube in 128-D ambient: PH_dim in
//    [6.5, 9.5]; < 5 min.
void criterion_5() {
    const auto start = Clock::now();
    bool ok = true;
    std::string detail;

    auto manifold_cloud = [](ManifoldKind kind, std::uint64_t seed) {
        SynthParams params;
        params.manifold = kind;
        params.n = 2000;
        params.seed = seed;
        return synthesize(params);
    };

    const PointCloud segment = manifold_cloud(ManifoldKind::segment, 71);
    const PointCloud square = manifold_cloud(ManifoldKind::square, 72);

    auto run_all = [&](const PointCloud& cloud, double truth,
                       const std::string& label) {
        SampleSchedule schedule = SampleSchedule::logspaced(cloud.size());
        schedule.seed = 5;
        const double values[4] = {
            ph_dim(cloud, 0, 1.0, schedule).dimension,
            twonn(cloud).value,
            mle_id(cloud, 10).value,
            correlation_dimension(cloud).value,
        };
        const char* names[4] = {"phdim", "twonn", "mle", "corrdim"};
        for (int m = 0; m < 4; ++m) {
            if (!(values[m] >= 0.8 * truth && values[m] <= 1.2 * truth))
                ok = false;
            detail += label + "/" + names[m] + "=" + fmt(values[m]) + " ";
        }
    };
    run_all(segment, 1.0, "seg");
    run_all(square, 2.0, "sq");

    SynthParams cube;
    cube.manifold = ManifoldKind::cube;
    cube.dim = 8;
    cube.ambient_dim = 128;
    cube.n = 4096;
    cube.seed = 73;
    const PointCloud embedded = synthesize(cube);
    SampleSchedule schedule = SampleSchedule::logspaced(embedded.size());
    schedule.seed = 6;
    const double cube_dim = ph_dim(embedded, 0, 1.0, schedule).dimension;
    if (!(cube_dim >= 6.5 && cube_dim <= 9.5)) ok = false;
    detail += "cube8->128/phdim=" + fmt(cube_dim);

    const double elapsed = seconds_since(start);
    ok = ok && elapsed < 300.0;
    report(5, "known-dimension recovery", ok,
           detail + " in " + fmt(elapsed) + " s");
}

// 6. Scaling a cloud by 3 multiplies E_alpha^i by 3^alpha (rel err < 1e-9)
//    and leaves PH_dim bit-identical under a fixed seed.
void criterion_6() {
    bool ok = true;
    std::string detail;

    // descriptor homogeneity on a random cloud, homology dims 0 and 1
    const PointCloud cloud = oracles::random_cloud(64, 3, 4242);
    std::vector<double> tripled(cloud.data());
    for (double& v : tripled) v *= 3.0;
    const PointCloud scaled(cloud.size(), 3, std::move(tripled));
    double worst = 0.0;
    for (int dim : {0, 1}) {
        for (double alpha : {0.5, 1.0, 2.0}) {
            DescriptorSpec spec;
            spec.dim = dim;
            spec.alpha = alpha;
            const double a = cloud_descriptor(cloud, spec).value;
            const double b = cloud_descriptor(scaled, spec).value;
            const double expected = std::pow(3.0, alpha) * a;
            worst = std::max(worst,
                             std::fabs(b - expected) / std::fabs(expected));
        }
    }
    if (!(worst < 1e-9)) ok = false;
    detail += "max rel err of 3^alpha scaling = " + fmt(worst);

    // PH_dim bit identity: integer collinear coordinates make every
    // distance (and its triple) an exact double, so the rescaled pipeline
    // sees identical numbers.
    const std::size_t n = 2048;
    std::vector<double> base(n), three(n);
    for (std::size_t i = 0; i < n; ++i) {
        base[i] = static_cast<double>(i);
        three[i] = static_cast<double>(3 * i);
    }
    const PointCloud line(n, 1, std::move(base));
    const PointCloud line3(n, 1, std::move(three));
    SampleSchedule schedule = SampleSchedule::logspaced(n);
    schedule.seed = 12345;
    const PhDimEstimate a = ph_dim(line, 0, 1.0, schedule);
    const PhDimEstimate b = ph_dim(line3, 0, 1.0, schedule);
    const bool bitwise = a.beta == b.beta && a.dimension == b.dimension &&
                         a.r_squared == b.r_squared;
    if (!bitwise) ok = false;
    detail += "; PH_dim " + fmt(a.dimension) +
              (bitwise ? " bit-identical under 3x" : " NOT bit-identical");

    report(6, "scale invariances", ok, detail);
}

// 7. Constructed 50-record family: generalization_report returns
//    r <= -0.9 and the records -> report pipeline runs end-to-end from the
//    CLI.
void criterion_7() {
    Rng rng(777);
    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    std::vector<ModelRecord> direct;
    for (int i = 0; i < 50; ++i) {
        const double u = rng.uniform01();
        const double accuracy = 0.5 + 0.4 * u;
        const double descriptor = 10.0 - 8.0 * u + 0.1 * rng.gaussian();
        records.push_back({{"model_id", "model-" + std::to_string(i)},
                           {"test_accuracy", accuracy},
                           {"descriptor_value", descriptor}});
        ModelRecord r;
        r.model_id = "model-" + std::to_string(i);
        r.test_accuracy = accuracy;
        r.last_layer_descriptor.value = descriptor;
        direct.push_back(r);
    }

    const double r_direct = generalization_report(direct).pearson;

    const fs::path records_path = g_workdir / "records.json";
    {
        std::ofstream out(records_path);
        out << nlohmann::ordered_json{{"spec", {{"i", 0}, {"alpha", 1.0}}},
                                      {"records", records}}
                   .dump(2);
    }
    const fs::path report_path = g_workdir / "correlate.json";
    const int code = run_cli("--output " + report_path.string() +
                             " correlate --records " + records_path.string());
    double r_cli = 0.0;
    if (code == 0) {
        const auto doc = nlohmann::json::parse(slurp(report_path));
        r_cli = doc.at("pearson_r").get<double>();
    }

    const bool ok = r_direct <= -0.9 && code == 0 && r_cli <= -0.9;
    report(7, "generalization correlation", ok,
           "library r = " + fmt(r_direct) + ", CLI r = " + fmt(r_cli) +
               ", exit = " + std::to_string(code));
}

// 8. 3-layer synthetic dump with per-layer scale 1/2^k: E_1^0 profile
//    halves per layer within 1e-6, through manifest parsing, GAP, batching,
//    class averaging and report emission.
void criterion_8() {
    const std::size_t n = 512;
    nlohmann::ordered_json sources = nlohmann::ordered_json::array();
    for (int layer = 0; layer < 3; ++layer) {
        const double scale = std::ldexp(1.0, -layer);
        for (int cls = 0; cls < 2; ++cls) {
            const PointCloud base = oracles::random_cloud(
                n, 8, 31000 + static_cast<std::uint64_t>(cls));
            std::vector<double> scaled(base.data());
            for (double& v : scaled) v *= scale;
            const PointCloud cloud(n, 8, std::move(scaled));

            Tensor4 tensor;
            tensor.shape = {n, 2, 2, 8};
            tensor.data.resize(n * 2 * 2 * 8);
            std::size_t out = 0;
            for (std::size_t s = 0; s < n; ++s)
                for (int cell = 0; cell < 4; ++cell)
                    for (std::size_t c = 0; c < 8; ++c)
                        tensor.data[out++] = cloud(s, c);

            const std::string name = "layer" + std::to_string(layer) +
                                     "_class" + std::to_string(cls) + ".npy";
            write_tensor_npy(g_workdir / name, tensor);
            sources.push_back({{"path", name},
                               {"format", "npy"},
                               {"layer_index", layer},
                               {"relative_depth", (layer + 1) / 3.0},
                               {"class_label", "c" + std::to_string(cls)}});
        }
    }

    const fs::path manifest_path = g_workdir / "manifest.json";
    {
        std::ofstream out(manifest_path);
        out << nlohmann::ordered_json{
                   {"seed", 4},
                   {"batch_size", 256},
                   {"batches", 3},
                   {"descriptors",
                    nlohmann::ordered_json::array(
                        {{{"i", 0}, {"alpha", 1.0}}})},
                   {"phdim", {{"enabled", false}}},
                   {"sources", sources}}
                   .dump(2);
    }

    const fs::path report_path = g_workdir / "profile.json";
    const int code = run_cli("--output " + report_path.string() +
                             " profile --manifest " + manifest_path.string());
    bool ok = code == 0;
    std::string detail = "exit = " + std::to_string(code);
    if (ok) {
        const auto doc = nlohmann::json::parse(slurp(report_path));
        const auto& layers = doc.at("layers");
        ok = layers.size() == 3;
        std::vector<double> values;
        for (const auto& layer : layers)
            values.push_back(
                layer.at("descriptors")[0].at("value").get<double>());
        for (std::size_t k = 0; ok && k + 1 < values.size(); ++k) {
            const double ratio = values[k] / values[k + 1];
            if (std::fabs(ratio - 2.0) > 1e-6) ok = false;
            detail += ", ratio[" + std::to_string(k) + "]=" + fmt(ratio);
        }
    }
    report(8, "layer-profile homogeneity", ok, detail);
}

// 9. Every CLI subcommand, run twice with identical flags and --seed,
//    produces byte-identical output.
void criterion_9() {
    bool ok = true;
    std::string detail;

    const fs::path cloud_path = g_workdir / "det_cloud.csv";
    // both runs use byte-identical flags; outputs are snapshotted between
    // the runs and compared afterwards
    auto check_pair = [&](const std::string& name, const std::string& args) {
        const fs::path out = g_workdir / ("det_" + name + ".out");
        const std::string full =
            "--seed 42 --output " + out.string() + " " + args;
        const int ca = run_cli(full, g_workdir / ("det_" + name + "_a.stdout"));
        const std::string first = slurp(out);
        const int cb = run_cli(full, g_workdir / ("det_" + name + "_b.stdout"));
        const bool same =
            ca == 0 && cb == 0 && first == slurp(out) &&
            slurp(g_workdir / ("det_" + name + "_a.stdout")) ==
                slurp(g_workdir / ("det_" + name + "_b.stdout"));
        if (!same) ok = false;
        detail += name + (same ? "=same " : "=DIFFERENT ");
    };

    check_pair("synth", "synth --manifold cube --dim 3 --n 300");
    // reuse the synth output as input for the analysis commands
    run_cli("--seed 42 --output " + cloud_path.string() +
            " synth --manifold square --n 400",
            g_workdir / "det_seed.stdout");
    check_pair("persistence",
               "persistence " + cloud_path.string() + " --max-dim 1");
    check_pair("descriptor", "descriptor " + cloud_path.string() +
                                 " --i 0 --alpha 1");
    check_pair("phdim", "phdim " + cloud_path.string() +
                            " --sizes 32,64,128,256 --repeats 3");
    check_pair("id", "id " + cloud_path.string() + " --method mle --k 10");
    check_pair("profile",
               "profile --manifest " + (g_workdir / "manifest.json").string());
    check_pair("correlate", "correlate --records " +
                                (g_workdir / "records.json").string());

    report(9, "CLI determinism", ok, detail);
}

} // namespace

int main() {
    g_workdir = fs::temp_directory_path() /
                ("topodim-acceptance-" + std::to_string(::getpid()));
    fs::create_directories(g_workdir);

    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();

    fs::remove_all(g_workdir);
    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all 9 criteria passed\n";
    return 0;
}
