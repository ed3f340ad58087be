#include <unistd.h>
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "topodim/errors.hpp"
#include "topodim/pipeline.hpp"
#include "topodim/reports.hpp"
#include "topodim/rng.hpp"

using namespace topodim;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("topodim-pipe-test-" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path file(const std::string& name) const { return path / name; }
};

// Tensor whose every spatial cell carries the sample's feature vector, so
// pooling must reproduce the vector exactly.
Tensor4 replicate_spatial(const PointCloud& cloud, std::size_t h,
                          std::size_t w) {
    Tensor4 tensor;
    tensor.shape = {cloud.size(), h, w, cloud.dim()};
    tensor.data.resize(cloud.size() * h * w * cloud.dim());
    std::size_t out = 0;
    for (std::size_t s = 0; s < cloud.size(); ++s)
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x)
                for (std::size_t c = 0; c < cloud.dim(); ++c)
                    tensor.data[out++] = cloud(s, c);
    return tensor;
}

} // namespace

TEST_CASE("global_average_pool: all-ones tensor") {
    Tensor4 tensor;
    tensor.shape = {2, 3, 3, 4};
    tensor.data.assign(2 * 3 * 3 * 4, 1.0);
    const PointCloud cloud = global_average_pool(tensor);
    CHECK(cloud.size() == 2);
    CHECK(cloud.dim() == 4);
    for (double v : cloud.data()) CHECK(v == 1.0);
}

TEST_CASE("global_average_pool: 1x1 spatial grid is a squeeze") {
    Tensor4 tensor;
    tensor.shape = {3, 1, 1, 2};
    tensor.data = {1, 2, 3, 4, 5, 6};
    const PointCloud cloud = global_average_pool(tensor);
    CHECK(cloud.data() == std::vector<double>{1, 2, 3, 4, 5, 6});
}

TEST_CASE("global_average_pool matches the nested-loop oracle") {
    Rng rng(33);
    Tensor4 tensor;
    tensor.shape = {3, 2, 2, 5};
    tensor.data.resize(3 * 2 * 2 * 5);
    for (double& v : tensor.data) v = rng.uniform01();

    const PointCloud cloud = global_average_pool(tensor);
    for (std::size_t s = 0; s < 3; ++s) {
        for (std::size_t c = 0; c < 5; ++c) {
            double acc = 0.0;
            for (std::size_t y = 0; y < 2; ++y)
                for (std::size_t x = 0; x < 2; ++x) acc += tensor(s, y, x, c);
            CHECK(cloud(s, c) == doctest::Approx(acc / 4.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("global_average_pool rejects NaN") {
    Tensor4 tensor;
    tensor.shape = {1, 1, 1, 1};
    tensor.data = {std::nan("")};
    CHECK_THROWS_AS(global_average_pool(tensor), std::invalid_argument);
}

TEST_CASE("pearson_r basics and the closed-form oracle") {
    std::vector<double> xs{1, 2, 3, 4};
    CHECK(pearson_r(xs, xs) == doctest::Approx(1.0).epsilon(1e-14));
    std::vector<double> neg{-1, -2, -3, -4};
    CHECK(pearson_r(xs, neg) == doctest::Approx(-1.0).epsilon(1e-14));

    std::vector<double> ys{2, 1, 4, 3};
    // covariance / product of standard deviations, computed by hand
    const double mx = 2.5, my = 2.5;
    double cov = 0.0, vx = 0.0, vy = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        cov += (xs[i] - mx) * (ys[i] - my);
        vx += (xs[i] - mx) * (xs[i] - mx);
        vy += (ys[i] - my) * (ys[i] - my);
    }
    CHECK(pearson_r(xs, ys) ==
          doctest::Approx(cov / std::sqrt(vx * vy)).epsilon(1e-12));

    std::vector<double> flat{1, 1, 1, 1};
    CHECK_THROWS_AS(pearson_r(xs, flat), estimation_error);
    std::vector<double> two{1, 2};
    CHECK_THROWS_AS(pearson_r(xs, two), std::invalid_argument);
}

TEST_CASE("pearson_r affine invariance and negation") {
    Rng rng(77);
    std::vector<double> xs, ys;
    for (int i = 0; i < 30; ++i) {
        xs.push_back(rng.uniform01());
        ys.push_back(rng.uniform01() + 0.5 * xs.back());
    }
    const double base = pearson_r(xs, ys);

    std::vector<double> shifted;
    for (double x : xs) shifted.push_back(3.0 * x + 11.0);
    CHECK(pearson_r(shifted, ys) == doctest::Approx(base).epsilon(1e-12));

    std::vector<double> negated;
    for (double y : ys) negated.push_back(-y);
    CHECK(pearson_r(xs, negated) == doctest::Approx(-base).epsilon(1e-12));
}

TEST_CASE("generalization_report: exact anticorrelation and degeneracies") {
    DescriptorSpec spec;
    std::vector<ModelRecord> records;
    for (int i = 0; i < 5; ++i) {
        ModelRecord r;
        r.model_id = "m" + std::to_string(i);
        r.test_accuracy = 0.5 + 0.1 * i;
        r.last_layer_descriptor.value = 10.0 - r.test_accuracy;
        r.last_layer_descriptor.spec = spec;
        records.push_back(r);
    }
    const GeneralizationReport report = generalization_report(records);
    CHECK(report.pearson == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(report.trend.slope == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(!report.weak_predictor);

    for (auto& r : records) r.test_accuracy = 0.7;
    CHECK_THROWS_AS(generalization_report(records), estimation_error);

    records.resize(2);
    CHECK_THROWS_AS(generalization_report(records), std::invalid_argument);
}

TEST_CASE("generalization_report rejects mixed specs") {
    std::vector<ModelRecord> records(3);
    for (int i = 0; i < 3; ++i) {
        records[i].model_id = "m" + std::to_string(i);
        records[i].test_accuracy = 0.5 + 0.1 * i;
        records[i].last_layer_descriptor.value = 1.0 + i;
    }
    records[2].last_layer_descriptor.spec.alpha = 2.0;
    CHECK_THROWS_AS(generalization_report(records), std::invalid_argument);
}

TEST_CASE("generalization_report flags a weak predictor") {
    Rng rng(123);
    std::vector<ModelRecord> records;
    for (int i = 0; i < 40; ++i) {
        ModelRecord r;
        r.model_id = "m" + std::to_string(i);
        r.test_accuracy = 0.5 + 0.4 * rng.uniform01();
        r.last_layer_descriptor.value = rng.uniform01(); // unrelated
        records.push_back(r);
    }
    const GeneralizationReport report = generalization_report(records);
    CHECK(report.weak_predictor == (std::abs(report.pearson) < 0.5));
}

TEST_CASE("generalization_report on the constructed noisy family") {
    Rng rng(2024);
    std::vector<ModelRecord> records;
    for (int i = 0; i < 50; ++i) {
        const double u = rng.uniform01();
        ModelRecord r;
        r.model_id = "model-" + std::to_string(i);
        r.test_accuracy = 0.5 + 0.4 * u;
        r.last_layer_descriptor.value = 10.0 - 8.0 * u + 0.1 * rng.gaussian();
        records.push_back(r);
    }
    const GeneralizationReport report = generalization_report(records);
    CHECK(report.pearson <= -0.9);
}

TEST_CASE("layer_profile: degenerate averaging equals direct computation") {
    TempDir dir;
    const PointCloud cloud = oracles::random_cloud(64, 2, 404);
    write_cloud_csv(dir.file("layer0.csv"), cloud);

    std::vector<EmbeddingSource> sources(1);
    sources[0].path = dir.file("layer0.csv").string();
    sources[0].format = FileFormat::csv;
    sources[0].layer_index = 0;
    sources[0].class_label = "only";

    ProfileConfig config;
    config.batch_size = 64;
    config.batches = 1;
    config.phdim.enabled = false;
    const LayerProfile profile = layer_profile(sources, config);

    REQUIRE(profile.layers.size() == 1);
    const double direct = cloud_descriptor(cloud, config.specs[0]).value;
    CHECK(profile.layers[0].descriptors[0].value ==
          doctest::Approx(direct).epsilon(1e-12));
    CHECK(profile.layers[0].relative_depth == 1.0);
}

TEST_CASE("layer_profile: class averaging of 4 and 6 gives 5") {
    TempDir dir;
    // collinear {0, s, 3s} has E_1^0 = 3s; choose s for values 4 and 6
    write_cloud_csv(dir.file("c0.csv"),
                    PointCloud(3, 1, {0.0, 4.0 / 3.0, 4.0}));
    write_cloud_csv(dir.file("c1.csv"), PointCloud(3, 1, {0.0, 2.0, 6.0}));

    std::vector<EmbeddingSource> sources(2);
    sources[0].path = dir.file("c0.csv").string();
    sources[0].layer_index = 0;
    sources[0].class_label = "a";
    sources[1].path = dir.file("c1.csv").string();
    sources[1].layer_index = 0;
    sources[1].class_label = "b";

    ProfileConfig config;
    config.batch_size = 3;
    config.batches = 1;
    config.phdim.enabled = false;
    const LayerProfile profile = layer_profile(sources, config);
    CHECK(profile.layers[0].descriptors[0].value ==
          doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("layer_profile: scaled layers halve the descriptor exactly") {
    TempDir dir;
    const std::size_t n = 256;
    const PointCloud base = oracles::random_cloud(n, 4, 31337);

    std::vector<EmbeddingSource> sources;
    for (int layer = 0; layer < 3; ++layer) {
        const double scale = std::ldexp(1.0, -layer); // 2^-layer, exact
        std::vector<double> scaled(base.data());
        for (double& v : scaled) v *= scale;
        const PointCloud cloud(n, 4, std::move(scaled));
        const Tensor4 tensor = replicate_spatial(cloud, 2, 2);
        const fs::path path =
            dir.file("layer" + std::to_string(layer) + ".npy");
        write_tensor_npy(path, tensor);

        EmbeddingSource source;
        source.path = path.string();
        source.format = FileFormat::npy;
        source.layer_index = layer;
        source.class_label = "c0";
        sources.push_back(source);
    }

    ProfileConfig config;
    config.batch_size = 128;
    config.batches = 3;
    config.seed = 99;
    config.phdim.enabled = false;
    const LayerProfile profile = layer_profile(sources, config);

    REQUIRE(profile.layers.size() == 3);
    for (std::size_t k = 0; k + 1 < 3; ++k) {
        const double ratio = profile.layers[k].descriptors[0].value /
                             profile.layers[k + 1].descriptors[0].value;
        CHECK(ratio == doctest::Approx(2.0).epsilon(1e-9));
    }
}

TEST_CASE("layer_profile: batch size guard and shrink option") {
    TempDir dir;
    const PointCloud cloud = oracles::random_cloud(10, 2, 1);
    write_cloud_csv(dir.file("small.csv"), cloud);
    std::vector<EmbeddingSource> sources(1);
    sources[0].path = dir.file("small.csv").string();
    sources[0].layer_index = 0;
    sources[0].class_label = "x";

    ProfileConfig config;
    config.batch_size = 50;
    config.batches = 2;
    config.phdim.enabled = false;
    CHECK_THROWS_AS(layer_profile(sources, config), std::invalid_argument);

    config.shrink_batches = true;
    const LayerProfile profile = layer_profile(sources, config);
    CHECK(profile.warnings.size() == 1);
}

TEST_CASE("layer_profile determinism") {
    TempDir dir;
    const PointCloud cloud = oracles::random_cloud(128, 3, 5150);
    write_cloud_csv(dir.file("l0.csv"), cloud);
    std::vector<EmbeddingSource> sources(1);
    sources[0].path = dir.file("l0.csv").string();
    sources[0].layer_index = 0;
    sources[0].class_label = "a";

    ProfileConfig config;
    config.batch_size = 100;
    config.batches = 3;
    config.seed = 7;
    config.phdim.enabled = true;
    config.phdim.schedule = SampleSchedule{{16, 32, 64, 100}, 3, 0};

    const LayerProfile a = layer_profile(sources, config);
    const LayerProfile b = layer_profile(sources, config);
    CHECK(a.layers[0].descriptors[0].value == b.layers[0].descriptors[0].value);
    REQUIRE(a.layers[0].phdim.has_value());
    CHECK(a.layers[0].phdim->dimension == b.layers[0].phdim->dimension);
    CHECK(a.layers[0].phdim->dimension ==
          config.phdim.alpha / (1.0 - a.layers[0].phdim->beta));
}

TEST_CASE("manifest loading resolves paths and settings") {
    TempDir dir;
    write_cloud_csv(dir.file("d.csv"), oracles::random_cloud(40, 2, 2));
    {
        std::ofstream out(dir.file("manifest.json"));
        out << R"({
  "seed": 5,
  "batch_size": 20,
  "batches": 2,
  "descriptors": [{"i": 0, "alpha": 1.0}],
  "phdim": {"enabled": false},
  "persistence": {"metric": "euclidean", "max_dim": 1, "threshold": "auto"},
  "sources": [
    {"path": "d.csv", "layer_index": 0, "relative_depth": 0.5,
     "class_label": "a"}
  ]
})";
    }
    const ProfileManifest manifest = load_manifest(dir.file("manifest.json"));
    CHECK(manifest.has_seed);
    CHECK(manifest.config.seed == 5);
    CHECK(manifest.config.batch_size == 20);
    CHECK(manifest.sources.size() == 1);
    CHECK(fs::path(manifest.sources[0].path).is_absolute());
    CHECK(manifest.sources[0].relative_depth == 0.5);

    const LayerProfile profile =
        layer_profile(manifest.sources, manifest.config);
    CHECK(profile.layers.size() == 1);
}

TEST_CASE("manifest errors") {
    TempDir dir;
    {
        std::ofstream out(dir.file("empty.json"));
        out << R"({"sources": []})";
    }
    CHECK_THROWS_AS(load_manifest(dir.file("empty.json")),
                    std::invalid_argument);
    {
        std::ofstream out(dir.file("broken.json"));
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_manifest(dir.file("broken.json")), io_error);
    CHECK_THROWS_AS(load_manifest(dir.file("absent.json")), io_error);
}

TEST_CASE("records loading: direct values and computed embeddings") {
    TempDir dir;
    // two class clouds for the computed record
    write_cloud_csv(dir.file("e0.csv"), oracles::random_cloud(30, 2, 8));
    write_cloud_csv(dir.file("e1.csv"), oracles::random_cloud(30, 2, 9));
    {
        std::ofstream out(dir.file("records.json"));
        out << R"({
  "spec": {"i": 0, "alpha": 1.0},
  "compute": {"per_class_examples": 20, "seed": 3},
  "records": [
    {"model_id": "direct", "test_accuracy": 0.9, "descriptor_value": 4.0},
    {"model_id": "computed", "test_accuracy": 0.8,
     "embeddings": [{"path": "e0.csv"}, {"path": "e1.csv"}]},
    {"model_id": "third", "test_accuracy": 0.7, "descriptor_value": 6.5}
  ]
})";
    }
    const RecordsFile file = load_records(dir.file("records.json"));
    REQUIRE(file.records.size() == 3);
    CHECK(file.records[0].last_layer_descriptor.value == 4.0);
    CHECK(file.records[1].last_layer_descriptor.value > 0.0);

    const GeneralizationReport report = generalization_report(file.records);
    CHECK(report.records.size() == 3);

    // per_class_examples larger than a class errors
    {
        std::ofstream out(dir.file("too_big.json"));
        out << R"({
  "compute": {"per_class_examples": 100},
  "records": [
    {"model_id": "m", "test_accuracy": 0.5,
     "embeddings": [{"path": "e0.csv"}]}
  ]
})";
    }
    CHECK_THROWS_AS(load_records(dir.file("too_big.json")),
                    std::invalid_argument);
}

TEST_CASE("report serializers are deterministic") {
    DescriptorValue value;
    value.value = 1.5;
    value.n_intervals = 3;
    CHECK(descriptor_json(value) == descriptor_json(value));
    CHECK(descriptor_csv(value).find("1.5") != std::string::npos);

    PersistenceDiagram diagram(0, 2.0);
    diagram.add({0.0, 1.0, 0});
    diagram.add({0.0, std::numeric_limits<double>::infinity(), 0});
    const std::string csv = diagram_csv(diagram);
    CHECK(csv.find("inf") != std::string::npos);
    const ojson j = diagram_json(diagram);
    CHECK(j["intervals"][1]["death"].is_null());

    LayerProfile profile;
    LayerResult layer;
    layer.layer_index = 0;
    layer.relative_depth = 0.5;
    layer.descriptors.push_back(value);
    PowerLawFit fit;
    fit.slope = 0.25;
    fit.r_squared = 0.9;
    layer.phdim = phdim_from_fit(1.0, 0, fit, {});
    profile.layers.push_back(layer);
    const std::string table = profile_csv(profile);
    CHECK(table.find("layer_index,relative_depth,E_i0_a1,phdim,phdim_r2") == 0);
    CHECK(profile_json(profile)["layers"][0]["phdim"]["beta"] == 0.25);

    GeneralizationReport report;
    for (int i = 0; i < 3; ++i) {
        ModelRecord r;
        r.model_id = "m" + std::to_string(i);
        r.test_accuracy = 0.5 + 0.1 * i;
        r.last_layer_descriptor.value = 3.0 - i;
        report.records.push_back(r);
    }
    report.pearson = -0.97;
    report.trend = {-0.1, 0.9};
    const std::string corr = correlation_csv(report);
    CHECK(corr.find("# pearson_r=-0.9") == 0);
    CHECK(corr.find("model_id,descriptor") != std::string::npos);
    CHECK(correlation_json(report)["pearson_r"] == -0.97);
}
