// Synthetic point clouds with known intrinsic dimension, used by the CLI
// `synth` subcommand and the test suites.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "topodim/geometry.hpp"

namespace topodim {

enum class ManifoldKind { segment, square, cube, circle, sphere };

ManifoldKind manifold_from_string(std::string_view name);
std::string to_string(ManifoldKind kind);

struct SynthParams {
    ManifoldKind manifold = ManifoldKind::square;
    std::size_t n = 1000;
    // Intrinsic dimension for cube and sphere; segment/square/circle are
    // fixed at 1, 2 and 1.
    int dim = 0;
    // When positive, embed into this many ambient dimensions via a random
    // rotation (an isometry, so all pairwise distances are preserved).
    int ambient_dim = 0;
    std::uint64_t seed = 0;
};

// Uniform samples: segment = [0,1], square = [0,1]^2, cube = [0,1]^dim,
// circle = unit circle in the plane, sphere = unit dim-sphere in R^(dim+1).
PointCloud synthesize(const SynthParams& params);

// n equally spaced points on the unit circle (a regular n-gon).
PointCloud regular_polygon(std::size_t n);

// Maps a d-column cloud into ambient_dim >= d columns through a random
// matrix with orthonormal columns (seeded, deterministic).
PointCloud embed_isometric(const PointCloud& cloud, int ambient_dim,
                           std::uint64_t seed);

} // namespace topodim
