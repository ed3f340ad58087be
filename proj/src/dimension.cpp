#include "topodim/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "topodim/errors.hpp"
#include "topodim/rng.hpp"

namespace topodim {

SampleSchedule SampleSchedule::logspaced(std::size_t n, std::size_t count,
                                         std::size_t min_size,
                                         std::size_t max_size,
                                         std::uint64_t seed) {
    if (count < 3)
        throw std::invalid_argument("SampleSchedule: need at least 3 sizes");
    const std::size_t hi = std::min(n, max_size);
    const std::size_t lo = std::min(min_size, hi);
    if (lo < 1)
        throw std::invalid_argument("SampleSchedule: sizes must be positive");

    SampleSchedule schedule;
    schedule.seed = seed;
    const double log_lo = std::log(static_cast<double>(lo));
    const double log_hi = std::log(static_cast<double>(hi));
    for (std::size_t i = 0; i < count; ++i) {
        const double t =
            count == 1 ? 0.0
                       : static_cast<double>(i) / static_cast<double>(count - 1);
        const auto size = static_cast<std::size_t>(
            std::llround(std::exp(log_lo + t * (log_hi - log_lo))));
        if (schedule.sizes.empty() || size > schedule.sizes.back())
            schedule.sizes.push_back(size);
    }
    if (schedule.sizes.size() < 3)
        throw std::invalid_argument(
            "SampleSchedule: cloud too small for a 3-point log-spaced "
            "schedule (n = " +
            std::to_string(n) + ")");
    return schedule;
}

void SampleSchedule::validate(std::size_t cloud_size) const {
    if (sizes.size() < 3)
        throw std::invalid_argument(
            "SampleSchedule: need at least 3 sizes for a meaningful fit");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 1)
            throw std::invalid_argument("SampleSchedule: sizes must be >= 1");
        if (i > 0 && sizes[i] <= sizes[i - 1])
            throw std::invalid_argument(
                "SampleSchedule: sizes must be strictly increasing");
    }
    if (sizes.back() > cloud_size)
        throw std::invalid_argument(
            "SampleSchedule: max size " + std::to_string(sizes.back()) +
            " exceeds cloud size " + std::to_string(cloud_size));
    if (repeats < 1)
        throw std::invalid_argument("SampleSchedule: repeats must be >= 1");
}

PowerLawFit fit_power_law(std::span<const double> xs,
                          std::span<const double> ys) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("fit_power_law: length mismatch");
    if (xs.size() < 2)
        throw std::invalid_argument("fit_power_law: need at least 2 points");

    const std::size_t n = xs.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0) || !std::isfinite(xs[i]) ||
            !std::isfinite(ys[i]))
            throw std::invalid_argument(
                "fit_power_law: all values must be positive and finite");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
    }

    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += lx[i];
        mean_y += ly[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = lx[i] - mean_x;
        const double dy = ly[i] - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0)
        throw estimation_error(
            "fit_power_law: degenerate fit, zero variance in log x");

    PowerLawFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;

    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double resid = ly[i] - (fit.slope * lx[i] + fit.intercept);
        ss_res += resid * resid;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    fit.r_squared = std::clamp(fit.r_squared, 0.0, 1.0);
    return fit;
}

PhDimEstimate phdim_from_fit(double alpha, int dim, const PowerLawFit& fit,
                             std::vector<std::pair<double, double>> points) {
    PhDimEstimate estimate;
    estimate.beta = fit.slope;
    estimate.alpha = alpha;
    estimate.dim = dim;
    estimate.r_squared = fit.r_squared;
    estimate.points = std::move(points);

    if (estimate.beta >= 1.0 - 1e-6)
        throw estimation_error(
            "ph_dim: non-estimable, fitted beta = " +
            std::to_string(estimate.beta) +
            " implies a diverging dimension alpha/(1-beta)");
    if (estimate.beta <= 0.0)
        estimate.warnings.push_back(
            "beta <= 0 (anti-scaling growth, likely noise or a degenerate "
            "cloud); dimension estimate is unreliable");

    estimate.dimension = alpha / (1.0 - estimate.beta);
    return estimate;
}

namespace {

constexpr std::uint64_t kPhDimTag = 0x5048444D; // stream tag for ph_dim draws

// Largest pairwise distance in the cloud, streamed without materializing
// the matrix.
double max_pairwise_distance(const PointCloud& cloud, Metric metric) {
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < cloud.size(); ++i)
        for (std::size_t j = i + 1; j < cloud.size(); ++j)
            best = std::max(best, point_distance(cloud, i, j, metric));
    return best;
}

double lifespan_power_sum_for_sample(const DistanceMatrix& dist, int dim,
                                     double alpha, const DiagramConfig& config) {
    if (dim == 0) {
        double sum = 0.0;
        for (double w : mst_edge_weights(dist))
            sum += alpha == 1.0 ? w : std::pow(w, alpha);
        return sum;
    }
    RipsParams params = config.rips;
    params.max_dim = std::max(params.max_dim, dim);
    const PersistenceDiagram diagram = rips_persistence(dist, params);
    DescriptorSpec spec;
    spec.dim = dim;
    spec.alpha = alpha;
    return e_alpha(diagram, spec).value;
}

} // namespace

PhDimEstimate ph_dim(const PointCloud& cloud, int dim, double alpha,
                     const SampleSchedule& schedule,
                     const DiagramConfig& config) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("ph_dim: alpha must be positive");
    if (dim < 0)
        throw std::invalid_argument("ph_dim: homology dimension must be >= 0");
    schedule.validate(cloud.size());

    const double scale = max_pairwise_distance(cloud, config.metric);
    if (scale == 0.0)
        throw estimation_error(
            "ph_dim: degenerate cloud, all points coincide");

    std::vector<double> sizes_x;
    std::vector<double> means_y;
    sizes_x.reserve(schedule.sizes.size());
    means_y.reserve(schedule.sizes.size());

    for (std::size_t j = 0; j < schedule.sizes.size(); ++j) {
        const std::size_t size = schedule.sizes[j];
        double sum = 0.0;
        for (std::size_t r = 0; r < schedule.repeats; ++r) {
            const std::uint64_t sub_seed =
                derive_seed(schedule.seed, kPhDimTag, j, r);
            const auto idx = subsample_indices(cloud.size(), size, sub_seed);
            const PointCloud sample = gather_rows(cloud, idx);
            DistanceMatrix dist = pairwise_distances(sample, config.metric);
            std::vector<double> normalized = dist.entries();
            for (double& e : normalized) e /= scale;
            const DistanceMatrix unit_dist(size, std::move(normalized));
            sum += lifespan_power_sum_for_sample(unit_dist, dim, alpha, config);
        }
        const double mean = sum / static_cast<double>(schedule.repeats);
        if (!(mean > 0.0))
            throw estimation_error(
                "ph_dim: mean lifespan sum vanished at sample size " +
                std::to_string(size) + "; cloud too degenerate to fit");
        sizes_x.push_back(static_cast<double>(size));
        means_y.push_back(mean);
    }

    const PowerLawFit fit = fit_power_law(sizes_x, means_y);

    // Report fit points with the rescaling undone so each y is the log of
    // the actual mean lifespan sum.
    const double log_scale = alpha * std::log(scale);
    std::vector<std::pair<double, double>> points;
    points.reserve(sizes_x.size());
    for (std::size_t j = 0; j < sizes_x.size(); ++j)
        points.emplace_back(std::log(sizes_x[j]),
                            std::log(means_y[j]) + log_scale);

    return phdim_from_fit(alpha, dim, fit, std::move(points));
}

std::string to_string(IdMethod method) {
    switch (method) {
    case IdMethod::phdim: return "phdim";
    case IdMethod::twonn: return "twonn";
    case IdMethod::mle: return "mle";
    case IdMethod::corrdim: return "corrdim";
    }
    return "unknown";
}

IdEstimate twonn(const PointCloud& cloud, Metric metric) {
    const std::size_t n = cloud.size();
    if (n < 3) throw std::invalid_argument("twonn: need at least 3 points");

    const DistanceMatrix dist = pairwise_distances(cloud, metric);
    const NeighborTable table = knn(dist, 2);

    std::vector<double> mus;
    mus.reserve(n);
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r1 = table.distance(i, 0);
        const double r2 = table.distance(i, 1);
        if (r1 == 0.0) {
            ++dropped;
            continue;
        }
        mus.push_back(r2 / r1);
    }
    if (dropped * 10 > n)
        throw estimation_error(
            "twonn: more than 10% of points dropped as duplicates (" +
            std::to_string(dropped) + " of " + std::to_string(n) + ")");

    std::sort(mus.begin(), mus.end());
    const std::size_t total = mus.size();
    const auto kept = static_cast<std::size_t>(
        std::floor(0.9 * static_cast<double>(total)));
    if (kept < 2)
        throw estimation_error("twonn: too few usable ratios after the "
                               "top-decile discard");

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 1; i <= kept; ++i) {
        const double x = std::log(mus[i - 1]);
        const double f = static_cast<double>(i) / static_cast<double>(total);
        const double y = -std::log1p(-f);
        sxy += x * y;
        sxx += x * x;
        syy += y * y;
    }
    if (sxx == 0.0)
        throw estimation_error(
            "twonn: degenerate, all neighbor ratios equal 1");

    IdEstimate estimate;
    estimate.method = IdMethod::twonn;
    estimate.value = sxy / sxx;
    estimate.points_used = kept;
    estimate.points_dropped = dropped;
    estimate.k = 2;
    // Through-origin coefficient of determination.
    estimate.r_squared =
        syy > 0.0 ? std::clamp((sxy * sxy) / (sxx * syy), 0.0, 1.0) : 1.0;
    if (dropped > 0)
        estimate.notes.push_back(std::to_string(dropped) +
                                 " duplicate points dropped (r1 = 0)");
    if (!(estimate.value > 0.0))
        throw estimation_error("twonn: non-estimable, fitted slope is not "
                               "positive");
    return estimate;
}

IdEstimate mle_id(const PointCloud& cloud, std::size_t k, Metric metric) {
    const std::size_t n = cloud.size();
    if (k < 2 || k > n - 1)
        throw std::invalid_argument("mle_id: need 2 <= k <= n-1, got k = " +
                                    std::to_string(k) + " with n = " +
                                    std::to_string(n));

    const DistanceMatrix dist = pairwise_distances(cloud, metric);
    const NeighborTable table = knn(dist, k);

    double inverse_sum = 0.0;
    std::size_t used = 0;
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < n; ++i) {
        bool degenerate = false;
        for (std::size_t j = 0; j < k; ++j) {
            if (table.distance(i, j) == 0.0) {
                degenerate = true;
                break;
            }
        }
        if (degenerate) {
            ++dropped;
            continue;
        }
        const double t_k = table.distance(i, k - 1);
        double acc = 0.0;
        for (std::size_t j = 0; j + 1 < k; ++j)
            acc += std::log(t_k / table.distance(i, j));
        inverse_sum += acc / static_cast<double>(k - 1);
        ++used;
    }
    if (dropped * 10 > n)
        throw estimation_error(
            "mle_id: more than 10% of points dropped as duplicates (" +
            std::to_string(dropped) + " of " + std::to_string(n) + ")");
    if (used == 0)
        throw estimation_error("mle_id: no usable points");

    const double mean_inverse = inverse_sum / static_cast<double>(used);
    if (!(mean_inverse > 0.0))
        throw estimation_error(
            "mle_id: degenerate neighborhood distances (all equal)");

    IdEstimate estimate;
    estimate.method = IdMethod::mle;
    estimate.value = 1.0 / mean_inverse;
    estimate.points_used = used;
    estimate.points_dropped = dropped;
    estimate.k = static_cast<int>(k);
    if (dropped > 0)
        estimate.notes.push_back(std::to_string(dropped) +
                                 " duplicate points dropped (zero neighbor "
                                 "distance)");
    return estimate;
}

std::vector<double> correlation_integral(const DistanceMatrix& dist,
                                         std::span<const double> radii) {
    const std::size_t n = dist.size();
    if (n < 2)
        throw std::invalid_argument(
            "correlation_integral: need at least 2 points");
    std::vector<double> sorted = dist.entries();
    std::sort(sorted.begin(), sorted.end());
    const double pair_count = static_cast<double>(sorted.size());

    std::vector<double> c;
    c.reserve(radii.size());
    for (double r : radii) {
        const auto below = static_cast<double>(
            std::lower_bound(sorted.begin(), sorted.end(), r) -
            sorted.begin());
        c.push_back(below / pair_count);
    }
    return c;
}

namespace {

// Linear-interpolation percentile of a sorted vector, q in [0, 100].
double percentile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace

IdEstimate correlation_dimension(const PointCloud& cloud,
                                 std::span<const double> radii,
                                 Metric metric) {
    const std::size_t n = cloud.size();
    if (n < 3)
        throw std::invalid_argument(
            "correlation_dimension: need at least 3 points");

    const DistanceMatrix dist = pairwise_distances(cloud, metric);

    std::vector<double> chosen;
    if (radii.empty()) {
        std::vector<double> sorted = dist.entries();
        std::sort(sorted.begin(), sorted.end());
        double lo = percentile_sorted(sorted, 5.0);
        if (lo <= 0.0) {
            const auto first_positive =
                std::upper_bound(sorted.begin(), sorted.end(), 0.0);
            if (first_positive == sorted.end())
                throw estimation_error(
                    "correlation_dimension: all pairwise distances are zero");
            lo = *first_positive;
        }
        double hi = percentile_sorted(sorted, 50.0);
        if (hi <= lo) hi = sorted.back();
        if (hi <= lo)
            throw estimation_error(
                "correlation_dimension: degenerate distance distribution");
        constexpr std::size_t kAutoRadii = 16;
        const double log_lo = std::log(lo);
        const double log_hi = std::log(hi);
        for (std::size_t i = 0; i < kAutoRadii; ++i) {
            const double t =
                static_cast<double>(i) / static_cast<double>(kAutoRadii - 1);
            chosen.push_back(std::exp(log_lo + t * (log_hi - log_lo)));
        }
    } else {
        chosen.assign(radii.begin(), radii.end());
        for (std::size_t i = 0; i < chosen.size(); ++i) {
            if (!(chosen[i] > 0.0))
                throw std::invalid_argument(
                    "correlation_dimension: radii must be positive");
            if (i > 0 && chosen[i] <= chosen[i - 1])
                throw std::invalid_argument(
                    "correlation_dimension: radii must be strictly increasing");
        }
    }

    const std::vector<double> c = correlation_integral(dist, chosen);
    std::vector<double> usable_r, usable_c;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        if (c[i] > 0.0 && c[i] < 1.0) {
            usable_r.push_back(chosen[i]);
            usable_c.push_back(c[i]);
        }
    }
    if (usable_r.size() < 3)
        throw estimation_error(
            "correlation_dimension: non-estimable, fewer than 3 usable radii "
            "(0 < C(r) < 1)");

    const PowerLawFit fit = fit_power_law(usable_r, usable_c);
    if (!(fit.slope > 0.0))
        throw estimation_error(
            "correlation_dimension: non-estimable, non-positive slope");

    IdEstimate estimate;
    estimate.method = IdMethod::corrdim;
    estimate.value = fit.slope;
    estimate.points_used = usable_r.size();
    estimate.r_squared = fit.r_squared;
    return estimate;
}

} // namespace topodim
