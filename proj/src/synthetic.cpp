#include "topodim/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "topodim/rng.hpp"

namespace topodim {

ManifoldKind manifold_from_string(std::string_view name) {
    if (name == "segment") return ManifoldKind::segment;
    if (name == "square") return ManifoldKind::square;
    if (name == "cube") return ManifoldKind::cube;
    if (name == "circle") return ManifoldKind::circle;
    if (name == "sphere") return ManifoldKind::sphere;
    throw std::invalid_argument("unknown manifold: " + std::string(name));
}

std::string to_string(ManifoldKind kind) {
    switch (kind) {
    case ManifoldKind::segment: return "segment";
    case ManifoldKind::square: return "square";
    case ManifoldKind::cube: return "cube";
    case ManifoldKind::circle: return "circle";
    case ManifoldKind::sphere: return "sphere";
    }
    return "unknown";
}

namespace {

PointCloud uniform_cube(std::size_t n, std::size_t d, Rng& rng) {
    std::vector<double> data(n * d);
    for (double& v : data) v = rng.uniform01();
    return PointCloud(n, d, std::move(data));
}

PointCloud uniform_circle(std::size_t n, Rng& rng) {
    std::vector<double> data(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double angle = 2.0 * std::numbers::pi * rng.uniform01();
        data[i * 2] = std::cos(angle);
        data[i * 2 + 1] = std::sin(angle);
    }
    return PointCloud(n, 2, std::move(data));
}

PointCloud uniform_sphere(std::size_t n, std::size_t ambient, Rng& rng) {
    std::vector<double> data(n * ambient);
    for (std::size_t i = 0; i < n; ++i) {
        double norm_sq = 0.0;
        do {
            norm_sq = 0.0;
            for (std::size_t k = 0; k < ambient; ++k) {
                const double g = rng.gaussian();
                data[i * ambient + k] = g;
                norm_sq += g * g;
            }
        } while (norm_sq == 0.0);
        const double inv_norm = 1.0 / std::sqrt(norm_sq);
        for (std::size_t k = 0; k < ambient; ++k)
            data[i * ambient + k] *= inv_norm;
    }
    return PointCloud(n, ambient, std::move(data));
}

} // namespace

PointCloud synthesize(const SynthParams& params) {
    if (params.n < 1)
        throw std::invalid_argument("synthesize: need n >= 1");

    Rng rng(derive_seed(params.seed, 0x53594E54)); // "SYNT"
    PointCloud cloud = [&]() -> PointCloud {
        switch (params.manifold) {
        case ManifoldKind::segment:
            return uniform_cube(params.n, 1, rng);
        case ManifoldKind::square:
            return uniform_cube(params.n, 2, rng);
        case ManifoldKind::cube: {
            const int d = params.dim > 0 ? params.dim : 3;
            return uniform_cube(params.n, static_cast<std::size_t>(d), rng);
        }
        case ManifoldKind::circle:
            return uniform_circle(params.n, rng);
        case ManifoldKind::sphere: {
            const int d = params.dim > 0 ? params.dim : 2;
            return uniform_sphere(params.n, static_cast<std::size_t>(d) + 1,
                                  rng);
        }
        }
        throw std::invalid_argument("synthesize: unknown manifold");
    }();

    if (params.ambient_dim > 0) {
        if (static_cast<std::size_t>(params.ambient_dim) < cloud.dim())
            throw std::invalid_argument(
                "synthesize: ambient dimension " +
                std::to_string(params.ambient_dim) +
                " is below the manifold's own dimension " +
                std::to_string(cloud.dim()));
        if (static_cast<std::size_t>(params.ambient_dim) > cloud.dim())
            cloud = embed_isometric(cloud, params.ambient_dim,
                                    derive_seed(params.seed, 0x454D4244));
    }
    return cloud;
}

PointCloud regular_polygon(std::size_t n) {
    if (n < 1) throw std::invalid_argument("regular_polygon: need n >= 1");
    std::vector<double> data(n * 2);
    for (std::size_t k = 0; k < n; ++k) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) /
                             static_cast<double>(n);
        data[k * 2] = std::cos(angle);
        data[k * 2 + 1] = std::sin(angle);
    }
    return PointCloud(n, 2, std::move(data));
}

PointCloud embed_isometric(const PointCloud& cloud, int ambient_dim,
                           std::uint64_t seed) {
    const std::size_t d = cloud.dim();
    const auto ambient = static_cast<std::size_t>(ambient_dim);
    if (ambient < d)
        throw std::invalid_argument(
            "embed_isometric: ambient dimension must be >= source dimension");

    // Random ambient x d matrix with orthonormal columns via modified
    // Gram-Schmidt (two passes for numerical safety). Gaussian columns are
    // almost surely independent; a vanishing pivot redraws the column.
    Rng rng(seed);
    std::vector<double> basis(ambient * d); // column-major
    for (std::size_t col = 0; col < d; ++col) {
        double* q = basis.data() + col * ambient;
        for (;;) {
            for (std::size_t row = 0; row < ambient; ++row)
                q[row] = rng.gaussian();
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t prev = 0; prev < col; ++prev) {
                    const double* p = basis.data() + prev * ambient;
                    double dot = 0.0;
                    for (std::size_t row = 0; row < ambient; ++row)
                        dot += q[row] * p[row];
                    for (std::size_t row = 0; row < ambient; ++row)
                        q[row] -= dot * p[row];
                }
            }
            double norm_sq = 0.0;
            for (std::size_t row = 0; row < ambient; ++row)
                norm_sq += q[row] * q[row];
            if (norm_sq > 1e-24) {
                const double inv_norm = 1.0 / std::sqrt(norm_sq);
                for (std::size_t row = 0; row < ambient; ++row)
                    q[row] *= inv_norm;
                break;
            }
        }
    }

    std::vector<double> data(cloud.size() * ambient, 0.0);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto row = cloud.row(i);
        double* out = data.data() + i * ambient;
        for (std::size_t col = 0; col < d; ++col) {
            const double* q = basis.data() + col * ambient;
            const double x = row[col];
            for (std::size_t r = 0; r < ambient; ++r) out[r] += x * q[r];
        }
    }
    return PointCloud(cloud.size(), ambient, std::move(data));
}

} // namespace topodim
