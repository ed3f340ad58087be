// Intrinsic dimension estimation: the persistent-homology fractal
// dimension via subsampling and power-law regression, plus three
// comparison estimators (TwoNN, MLE, correlation dimension) and the
// shared log-log fitting routine.
#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "topodim/descriptors.hpp"
#include "topodim/geometry.hpp"

namespace topodim {

// Subsample sizes and repeat count driving the growth-rate fit. Sizes must
// be strictly increasing with at least three entries.
struct SampleSchedule {
    std::vector<std::size_t> sizes;
    std::size_t repeats = 5;
    std::uint64_t seed = 0;

    // Log-spaced sizes from min_size to min(n, max_size); duplicates from
    // rounding are collapsed.
    static SampleSchedule logspaced(std::size_t n, std::size_t count = 8,
                                    std::size_t min_size = 64,
                                    std::size_t max_size = 4096,
                                    std::uint64_t seed = 0);

    void validate(std::size_t cloud_size) const;
};

struct PowerLawFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

// Ordinary least squares on (log xs, log ys); natural logarithms (the
// slope is base-invariant). Requires equal lengths >= 2 and all values
// positive; throws estimation_error when log xs has zero variance.
PowerLawFit fit_power_law(std::span<const double> xs,
                          std::span<const double> ys);

struct PhDimEstimate {
    double beta = 0.0;      // fitted log-log slope
    double dimension = 0.0; // alpha / (1 - beta)
    double alpha = 1.0;
    int dim = 0;            // homology dimension
    double r_squared = 0.0;
    // (log n, log mean-lifespan-sum) pairs fitted, natural logs.
    std::vector<std::pair<double, double>> points;
    std::vector<std::string> warnings;
};

// Assembles the estimate from a fitted growth law, applying the guards:
// beta >= 1 - 1e-6 throws estimation_error (diverging dimension), beta <= 0
// records an anti-scaling warning.
PhDimEstimate phdim_from_fit(double alpha, int dim, const PowerLawFit& fit,
                             std::vector<std::pair<double, double>> points);

// For each schedule size, draws `repeats` subsamples (seed stream derived
// from (schedule.seed, size index, repeat index), so results do not depend
// on evaluation order), computes the lifespan power sum of each, averages,
// and fits log(mean) against log(n).
//
// Distances are internally rescaled by the cloud's maximum pairwise
// distance before any persistence runs; the slope is scale-free, so this
// only conditions the arithmetic (and makes the estimate invariant under
// any cloud scaling that maps distances exactly).
//
// dim = 0 routes through MST edge weights, never the boundary matrix.
PhDimEstimate ph_dim(const PointCloud& cloud, int dim, double alpha,
                     const SampleSchedule& schedule,
                     const DiagramConfig& config = {});

enum class IdMethod { phdim, twonn, mle, corrdim };

std::string to_string(IdMethod method);

struct IdEstimate {
    IdMethod method = IdMethod::twonn;
    double value = 0.0;
    std::size_t points_used = 0;
    std::size_t points_dropped = 0;
    int k = 0; // neighbor count, when the method uses one
    double r_squared = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::string> notes;
};

// Two-nearest-neighbor estimator: per point the ratio mu = r2/r1, then a
// through-origin fit of -log(1 - F(mu)) against log mu over the empirical
// CDF, with the top decile of mu discarded. Points with r1 = 0 (duplicates)
// are dropped; more than 10% dropped is an error.
IdEstimate twonn(const PointCloud& cloud, Metric metric = Metric::euclidean);

// Maximum-likelihood estimator with k neighbors; per-point inverse
// estimates are averaged and the mean inverted. Requires 2 <= k <= n-1.
IdEstimate mle_id(const PointCloud& cloud, std::size_t k,
                  Metric metric = Metric::euclidean);

// C(r) = (2 / n(n-1)) * #{pairs with distance < r} for each radius.
std::vector<double> correlation_integral(const DistanceMatrix& dist,
                                         std::span<const double> radii);

// Slope of log C(r) against log r over the radii where 0 < C(r) < 1.
// An empty radii span selects 16 log-spaced radii between the 5th and 50th
// percentile of pairwise distances. Intended for n >= 10; smaller clouds
// are accepted but noisy.
IdEstimate correlation_dimension(const PointCloud& cloud,
                                 std::span<const double> radii = {},
                                 Metric metric = Metric::euclidean);

} // namespace topodim
