// Vietoris-Rips persistent homology. Dimension 0 runs through union-find
// (equivalently, a minimum spanning tree); dimensions >= 1 through
// boundary-matrix reduction over the two-element field with the
// clearing/twist optimization.
//
// Filtration-scale convention: a simplex enters at the maximum pairwise
// distance among its vertices (the edge-length convention, not the ball
// radius, which would halve every value).
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "topodim/geometry.hpp"

namespace topodim {

struct PersistenceInterval {
    double birth = 0.0;
    double death = std::numeric_limits<double>::infinity();
    int dim = 0;

    bool infinite() const {
        return death == std::numeric_limits<double>::infinity();
    }
    bool zero_length() const { return death == birth; }
    // Finite iff death is finite.
    double lifespan() const { return death - birth; }
};

// Per-homology-dimension multiset of (birth, death) intervals. Intervals
// with birth == death are kept; callers filter them via zero_length().
class PersistenceDiagram {
public:
    PersistenceDiagram(int max_dim, double threshold);

    void add(PersistenceInterval interval);

    int max_dim() const { return max_dim_; }
    double threshold() const { return threshold_; }

    const std::vector<PersistenceInterval>& intervals(int dim) const;
    std::size_t total_intervals() const;

private:
    int max_dim_;
    double threshold_;
    std::vector<std::vector<PersistenceInterval>> by_dim_;
};

// Count of dimension-dim intervals with birth <= t < death.
int betti_at(const PersistenceDiagram& diagram, double t, int dim);

struct Simplex {
    std::vector<std::int32_t> vertices; // strictly increasing
    double value = 0.0;                 // max pairwise distance

    int dim() const { return static_cast<int>(vertices.size()) - 1; }
};

// All simplices of dimension 0..max_simplex_dim with filtration value
// <= threshold, sorted by (value, dimension, lexicographic vertex tuple).
// Every face of a simplex precedes it in this order.
struct FiltrationOrder {
    std::vector<Simplex> simplices;
};

struct RipsParams {
    int max_dim = 1;
    // Filtration truncation; std::nullopt means "auto" = enclosing radius.
    std::optional<double> threshold;
    std::size_t simplex_cap = 50'000'000;
};

// Throws resource_limit_error when the simplex count would exceed cap.
FiltrationOrder build_filtration(const DistanceMatrix& dist,
                                 int max_simplex_dim, double threshold,
                                 std::size_t cap);

// Dimension-0 barcode of the full (untruncated) filtration: n-1 finite
// intervals with birth 0 whose deaths are the MST edge weights, plus one
// infinite interval.
PersistenceDiagram h0_persistence(const DistanceMatrix& dist);

// The n-1 edge weights of a minimum spanning tree (dense Prim, so this is
// an algebraic route independent of the union-find path above).
std::vector<double> mst_edge_weights(const DistanceMatrix& dist);

// Sum of MST edge weights; equals the alpha = 1 lifespan sum of
// h0_persistence's finite intervals.
double mst_total_length(const DistanceMatrix& dist);

// Diagrams for dimensions 0..params.max_dim. Dimension 0 always routes
// through union-find; the boundary matrix covers dimensions >= 1, with
// columns up to dimension max_dim + 1 so that deaths in dimension max_dim
// are paired.
PersistenceDiagram rips_persistence(const DistanceMatrix& dist,
                                    const RipsParams& params = {});

} // namespace topodim
