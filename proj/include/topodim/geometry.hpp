// Point clouds, metrics, pairwise distances, k-nearest neighbors and
// subsampling. Everything downstream consumes these types.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace topodim {

// n points in d-dimensional real space, row-major, immutable after
// construction. All coordinates are finite; n >= 1, d >= 1.
class PointCloud {
public:
    PointCloud(std::size_t n, std::size_t d, std::vector<double> data);

    std::size_t size() const { return n_; }
    std::size_t dim() const { return d_; }

    double operator()(std::size_t i, std::size_t k) const {
        return data_[i * d_ + k];
    }
    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * d_, d_};
    }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t n_;
    std::size_t d_;
    std::vector<double> data_;
};

enum class Metric { euclidean, manhattan, chebyshev, cosine };

Metric metric_from_string(std::string_view name);
std::string to_string(Metric metric);

// Condensed pairwise-distance store: only the n(n-1)/2 upper-triangle
// entries are kept. The unordered pair (i, j) with i < j lives at
//   index = i*n - i*(i+1)/2 + (j - i - 1)
// which walks row i's tail [i+1, n). Entries are >= 0 and finite.
class DistanceMatrix {
public:
    DistanceMatrix(std::size_t n, std::vector<double> condensed);

    std::size_t size() const { return n_; }

    std::size_t pair_index(std::size_t i, std::size_t j) const;

    double operator()(std::size_t i, std::size_t j) const {
        if (i == j) return 0.0;
        return entries_[pair_index(i, j)];
    }

    const std::vector<double>& entries() const { return entries_; }

private:
    std::size_t n_;
    std::vector<double> entries_;
};

// k nearest neighbors per point, row-major n x k. Within a row distances
// are non-decreasing and ties are broken by the lower point index.
struct NeighborTable {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<std::int32_t> indices;
    std::vector<double> distances;

    std::int32_t index(std::size_t i, std::size_t j) const {
        return indices[i * k + j];
    }
    double distance(std::size_t i, std::size_t j) const {
        return distances[i * k + j];
    }
};

// entry(i,j) = metric distance between points i and j. Cosine distance
// requires every row to have a nonzero norm (throws std::invalid_argument
// naming the offending row otherwise). Parallelized over rows; the result
// does not depend on the thread count.
DistanceMatrix pairwise_distances(const PointCloud& cloud,
                                  Metric metric = Metric::euclidean);

// Distance between two points without materializing a matrix. Matches
// pairwise_distances entry-for-entry.
double point_distance(const PointCloud& cloud, std::size_t i, std::size_t j,
                      Metric metric = Metric::euclidean);

// Requires 1 <= k <= n-1.
NeighborTable knn(const DistanceMatrix& dist, std::size_t k);

// m distinct indices drawn uniformly without replacement from [0, n);
// deterministic for a fixed seed (partial Fisher-Yates over mt19937_64).
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t m,
                                           std::uint64_t seed);

// m distinct rows drawn uniformly without replacement. Requires 1 <= m <= n.
PointCloud subsample(const PointCloud& cloud, std::size_t m,
                     std::uint64_t seed);

// Gathers the given rows into a new cloud (sampling order preserved).
PointCloud gather_rows(const PointCloud& cloud,
                       std::span<const std::size_t> rows);

// min over points i of (max over j of entry(i, j)); 0 for a single point.
// Beyond this filtration value the Rips complex is a cone, so homology
// above dimension 0 is dead.
double enclosing_radius(const DistanceMatrix& dist);

} // namespace topodim
