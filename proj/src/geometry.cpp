#include "topodim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "topodim/parallel.hpp"
#include "topodim/rng.hpp"

namespace topodim {

PointCloud::PointCloud(std::size_t n, std::size_t d, std::vector<double> data)
    : n_(n), d_(d), data_(std::move(data)) {
    if (n_ < 1 || d_ < 1)
        throw std::invalid_argument("PointCloud: need n >= 1 and d >= 1");
    if (data_.size() != n_ * d_)
        throw std::invalid_argument("PointCloud: data size " +
                                    std::to_string(data_.size()) +
                                    " does not match n*d = " +
                                    std::to_string(n_ * d_));
    for (std::size_t idx = 0; idx < data_.size(); ++idx) {
        if (!std::isfinite(data_[idx]))
            throw std::invalid_argument(
                "PointCloud: non-finite coordinate at row " +
                std::to_string(idx / d_) + ", column " +
                std::to_string(idx % d_));
    }
}

Metric metric_from_string(std::string_view name) {
    if (name == "euclidean") return Metric::euclidean;
    if (name == "manhattan") return Metric::manhattan;
    if (name == "chebyshev") return Metric::chebyshev;
    if (name == "cosine") return Metric::cosine;
    throw std::invalid_argument("unknown metric: " + std::string(name));
}

std::string to_string(Metric metric) {
    switch (metric) {
    case Metric::euclidean: return "euclidean";
    case Metric::manhattan: return "manhattan";
    case Metric::chebyshev: return "chebyshev";
    case Metric::cosine: return "cosine";
    }
    return "unknown";
}

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> condensed)
    : n_(n), entries_(std::move(condensed)) {
    if (n_ < 1) throw std::invalid_argument("DistanceMatrix: need n >= 1");
    if (entries_.size() != n_ * (n_ - 1) / 2)
        throw std::invalid_argument(
            "DistanceMatrix: expected " + std::to_string(n_ * (n_ - 1) / 2) +
            " condensed entries, got " + std::to_string(entries_.size()));
    for (double e : entries_) {
        if (!(e >= 0.0) || !std::isfinite(e))
            throw std::invalid_argument(
                "DistanceMatrix: entries must be finite and non-negative");
    }
}

std::size_t DistanceMatrix::pair_index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * n_ - i * (i + 1) / 2 + (j - i - 1);
}

namespace {

double metric_distance(std::span<const double> a, std::span<const double> b,
                       Metric metric) {
    const std::size_t d = a.size();
    switch (metric) {
    case Metric::euclidean: {
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double diff = a[k] - b[k];
            acc += diff * diff;
        }
        return std::sqrt(acc);
    }
    case Metric::manhattan: {
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k) acc += std::abs(a[k] - b[k]);
        return acc;
    }
    case Metric::chebyshev: {
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k)
            acc = std::max(acc, std::abs(a[k] - b[k]));
        return acc;
    }
    case Metric::cosine:
        break; // handled by the caller (needs precomputed norms)
    }
    return 0.0;
}

} // namespace

DistanceMatrix pairwise_distances(const PointCloud& cloud, Metric metric) {
    const std::size_t n = cloud.size();
    std::vector<double> entries(n * (n - 1) / 2, 0.0);

    std::vector<double> norms;
    if (metric == Metric::cosine) {
        norms.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (double v : cloud.row(i)) acc += v * v;
            norms[i] = std::sqrt(acc);
            if (norms[i] == 0.0)
                throw std::invalid_argument(
                    "cosine distance undefined for zero-norm point at row " +
                    std::to_string(i));
        }
    }

    if (n == 1) return DistanceMatrix(n, std::move(entries));

    parallel_for(n - 1, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto row_i = cloud.row(i);
            std::size_t out = i * n - i * (i + 1) / 2;
            for (std::size_t j = i + 1; j < n; ++j, ++out) {
                if (metric == Metric::cosine) {
                    double dot = 0.0;
                    const auto row_j = cloud.row(j);
                    for (std::size_t k = 0; k < cloud.dim(); ++k)
                        dot += row_i[k] * row_j[k];
                    const double sim =
                        std::clamp(dot / (norms[i] * norms[j]), -1.0, 1.0);
                    entries[out] = 1.0 - sim;
                } else {
                    entries[out] = metric_distance(row_i, cloud.row(j), metric);
                }
            }
        }
    });

    return DistanceMatrix(n, std::move(entries));
}

double point_distance(const PointCloud& cloud, std::size_t i, std::size_t j,
                      Metric metric) {
    if (metric != Metric::cosine)
        return metric_distance(cloud.row(i), cloud.row(j), metric);
    double norm_i = 0.0, norm_j = 0.0, dot = 0.0;
    const auto a = cloud.row(i);
    const auto b = cloud.row(j);
    for (std::size_t k = 0; k < cloud.dim(); ++k) {
        norm_i += a[k] * a[k];
        norm_j += b[k] * b[k];
        dot += a[k] * b[k];
    }
    if (norm_i == 0.0)
        throw std::invalid_argument(
            "cosine distance undefined for zero-norm point at row " +
            std::to_string(i));
    if (norm_j == 0.0)
        throw std::invalid_argument(
            "cosine distance undefined for zero-norm point at row " +
            std::to_string(j));
    const double sim =
        std::clamp(dot / (std::sqrt(norm_i) * std::sqrt(norm_j)), -1.0, 1.0);
    return 1.0 - sim;
}

NeighborTable knn(const DistanceMatrix& dist, std::size_t k) {
    const std::size_t n = dist.size();
    if (k < 1 || k > n - 1)
        throw std::invalid_argument("knn: need 1 <= k <= n-1, got k = " +
                                    std::to_string(k) + " with n = " +
                                    std::to_string(n));

    NeighborTable table;
    table.n = n;
    table.k = k;
    table.indices.resize(n * k);
    table.distances.resize(n * k);

    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, std::int32_t>> candidates(n - 1);
        for (std::size_t i = begin; i < end; ++i) {
            std::size_t c = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                candidates[c++] = {dist(i, j), static_cast<std::int32_t>(j)};
            }
            std::partial_sort(candidates.begin(), candidates.begin() + k,
                              candidates.end());
            for (std::size_t j = 0; j < k; ++j) {
                table.distances[i * k + j] = candidates[j].first;
                table.indices[i * k + j] = candidates[j].second;
            }
        }
    });

    return table;
}

std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t m,
                                           std::uint64_t seed) {
    if (m < 1 || m > n)
        throw std::invalid_argument("subsample: need 1 <= m <= n, got m = " +
                                    std::to_string(m) + " with n = " +
                                    std::to_string(n));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t t = 0; t < m; ++t) {
        const std::size_t j = t + rng.uniform_below(n - t);
        std::swap(idx[t], idx[j]);
    }
    idx.resize(m);
    return idx;
}

PointCloud gather_rows(const PointCloud& cloud,
                       std::span<const std::size_t> rows) {
    std::vector<double> data;
    data.reserve(rows.size() * cloud.dim());
    for (std::size_t r : rows) {
        const auto row = cloud.row(r);
        data.insert(data.end(), row.begin(), row.end());
    }
    return PointCloud(rows.size(), cloud.dim(), std::move(data));
}

PointCloud subsample(const PointCloud& cloud, std::size_t m,
                     std::uint64_t seed) {
    const auto idx = subsample_indices(cloud.size(), m, seed);
    return gather_rows(cloud, idx);
}

double enclosing_radius(const DistanceMatrix& dist) {
    const std::size_t n = dist.size();
    if (n == 1) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double row_max = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            row_max = std::max(row_max, dist(i, j));
        }
        best = std::min(best, row_max);
    }
    return best;
}

} // namespace topodim
