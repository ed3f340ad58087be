// Scalar topological descriptors of persistence diagrams: the
// power-weighted lifespan sum, its lifespan-averaged variant, and
// aggregation across a set of clouds.
#pragma once

#include <span>

#include "topodim/geometry.hpp"
#include "topodim/persistence.hpp"

namespace topodim {

struct DescriptorSpec {
    int dim = 0;          // homology dimension
    double alpha = 1.0;   // weight exponent, >= 0
    bool averaged = false; // divide by the finite-interval count
    // Zero-length intervals contribute 0 for alpha > 0 but 1 for alpha = 0,
    // so dropping them changes alpha = 0 counts.
    bool include_zero_length = true;

    bool operator==(const DescriptorSpec&) const = default;
};

struct DescriptorValue {
    double value = 0.0;
    // Count of finite intervals used; fractional when this value is a mean
    // across clouds.
    double n_intervals = 0.0;
    DescriptorSpec spec;
};

// Sum over finite dimension-spec.dim intervals of lifespan^alpha. Infinite
// intervals are always excluded. Requires spec.averaged == false and
// spec.dim <= diagram.max_dim().
DescriptorValue e_alpha(const PersistenceDiagram& diagram,
                        const DescriptorSpec& spec);

// e_alpha divided by the interval count; 0 when the finite part is empty.
// Requires spec.averaged == true.
DescriptorValue averaged_e_alpha(const PersistenceDiagram& diagram,
                                 const DescriptorSpec& spec);

// How a cloud becomes a diagram: metric plus Rips parameters. Dimension-0
// descriptors skip the boundary matrix entirely.
struct DiagramConfig {
    Metric metric = Metric::euclidean;
    RipsParams rips;
};

// Diagram covering homology dimensions 0..dim_needed under the config.
PersistenceDiagram diagram_for(const PointCloud& cloud, int dim_needed,
                               const DiagramConfig& config = {});

// Descriptor of a single cloud under the config.
DescriptorValue cloud_descriptor(const PointCloud& cloud,
                                 const DescriptorSpec& spec,
                                 const DiagramConfig& config = {});

// Arithmetic mean of per-cloud descriptor values; n_intervals reports the
// mean count. Requires at least one cloud.
DescriptorValue class_averaged_descriptor(std::span<const PointCloud> clouds,
                                          const DescriptorSpec& spec,
                                          const DiagramConfig& config = {});

} // namespace topodim
