#include "topodim/descriptors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace topodim {

namespace {

DescriptorValue lifespan_power_sum(const PersistenceDiagram& diagram,
                                   const DescriptorSpec& spec) {
    if (spec.alpha < 0.0)
        throw std::invalid_argument("descriptor: alpha must be >= 0");
    if (spec.dim > diagram.max_dim())
        throw std::invalid_argument(
            "descriptor: homology dimension " + std::to_string(spec.dim) +
            " exceeds diagram max_dim " + std::to_string(diagram.max_dim()));

    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& interval : diagram.intervals(spec.dim)) {
        if (interval.infinite()) continue;
        if (!spec.include_zero_length && interval.zero_length()) continue;
        ++count;
        const double lifespan = interval.lifespan();
        if (spec.alpha == 0.0)
            sum += 1.0; // 0^0 = 1: zero-length intervals count
        else if (spec.alpha == 1.0)
            sum += lifespan;
        else
            sum += std::pow(lifespan, spec.alpha);
    }

    DescriptorValue result;
    result.value = sum;
    result.n_intervals = static_cast<double>(count);
    result.spec = spec;
    return result;
}

} // namespace

DescriptorValue e_alpha(const PersistenceDiagram& diagram,
                        const DescriptorSpec& spec) {
    if (spec.averaged)
        throw std::invalid_argument(
            "e_alpha: spec.averaged must be false (use averaged_e_alpha)");
    return lifespan_power_sum(diagram, spec);
}

DescriptorValue averaged_e_alpha(const PersistenceDiagram& diagram,
                                 const DescriptorSpec& spec) {
    if (!spec.averaged)
        throw std::invalid_argument(
            "averaged_e_alpha: spec.averaged must be true (use e_alpha)");
    DescriptorValue result = lifespan_power_sum(diagram, spec);
    if (result.n_intervals > 0.0) result.value /= result.n_intervals;
    return result;
}

PersistenceDiagram diagram_for(const PointCloud& cloud, int dim_needed,
                               const DiagramConfig& config) {
    const DistanceMatrix dist = pairwise_distances(cloud, config.metric);
    if (dim_needed == 0) return h0_persistence(dist);
    RipsParams params = config.rips;
    params.max_dim = std::max(params.max_dim, dim_needed);
    return rips_persistence(dist, params);
}

DescriptorValue cloud_descriptor(const PointCloud& cloud,
                                 const DescriptorSpec& spec,
                                 const DiagramConfig& config) {
    const PersistenceDiagram diagram = diagram_for(cloud, spec.dim, config);
    return spec.averaged ? averaged_e_alpha(diagram, spec)
                         : e_alpha(diagram, spec);
}

DescriptorValue class_averaged_descriptor(std::span<const PointCloud> clouds,
                                          const DescriptorSpec& spec,
                                          const DiagramConfig& config) {
    if (clouds.empty())
        throw std::invalid_argument(
            "class_averaged_descriptor: need at least one cloud");

    double value_sum = 0.0;
    double count_sum = 0.0;
    for (const PointCloud& cloud : clouds) {
        const DescriptorValue v = cloud_descriptor(cloud, spec, config);
        value_sum += v.value;
        count_sum += v.n_intervals;
    }

    DescriptorValue result;
    result.value = value_sum / static_cast<double>(clouds.size());
    result.n_intervals = count_sum / static_cast<double>(clouds.size());
    result.spec = spec;
    return result;
}

} // namespace topodim
