#include "topodim/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "topodim/errors.hpp"

namespace topodim {

PersistenceDiagram::PersistenceDiagram(int max_dim, double threshold)
    : max_dim_(max_dim), threshold_(threshold),
      by_dim_(static_cast<std::size_t>(max_dim) + 1) {
    if (max_dim < 0)
        throw std::invalid_argument("PersistenceDiagram: max_dim must be >= 0");
}

void PersistenceDiagram::add(PersistenceInterval interval) {
    if (interval.dim < 0 || interval.dim > max_dim_)
        throw std::invalid_argument("PersistenceDiagram: interval dimension " +
                                    std::to_string(interval.dim) +
                                    " outside 0.." + std::to_string(max_dim_));
    if (interval.death < interval.birth)
        throw std::invalid_argument(
            "PersistenceDiagram: death before birth (negative lifespan)");
    by_dim_[interval.dim].push_back(interval);
}

const std::vector<PersistenceInterval>&
PersistenceDiagram::intervals(int dim) const {
    if (dim < 0 || dim > max_dim_)
        throw std::invalid_argument("PersistenceDiagram: dimension " +
                                    std::to_string(dim) + " outside 0.." +
                                    std::to_string(max_dim_));
    return by_dim_[dim];
}

std::size_t PersistenceDiagram::total_intervals() const {
    std::size_t total = 0;
    for (const auto& v : by_dim_) total += v.size();
    return total;
}

int betti_at(const PersistenceDiagram& diagram, double t, int dim) {
    int count = 0;
    for (const auto& interval : diagram.intervals(dim)) {
        if (interval.birth <= t && t < interval.death) ++count;
    }
    return count;
}

namespace {

struct UnionFind {
    std::vector<std::int32_t> parent;
    std::vector<std::int32_t> rank;

    explicit UnionFind(std::size_t n) : parent(n), rank(n, 0) {
        std::iota(parent.begin(), parent.end(), std::int32_t{0});
    }

    std::int32_t find(std::int32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]]; // path halving
            x = parent[x];
        }
        return x;
    }

    bool unite(std::int32_t a, std::int32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (rank[a] < rank[b]) std::swap(a, b);
        parent[b] = a;
        if (rank[a] == rank[b]) ++rank[a];
        return true;
    }
};

struct Edge {
    double weight;
    std::int32_t i;
    std::int32_t j;

    bool operator<(const Edge& other) const {
        if (weight != other.weight) return weight < other.weight;
        if (i != other.i) return i < other.i;
        return j < other.j;
    }
};

std::vector<Edge> sorted_edges(const DistanceMatrix& dist, double threshold) {
    const std::size_t n = dist.size();
    std::vector<Edge> edges;
    edges.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double w = dist(i, j);
            if (w <= threshold)
                edges.push_back({w, static_cast<std::int32_t>(i),
                                 static_cast<std::int32_t>(j)});
        }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

} // namespace

PersistenceDiagram h0_persistence(const DistanceMatrix& dist) {
    const std::size_t n = dist.size();
    const double inf = std::numeric_limits<double>::infinity();
    PersistenceDiagram diagram(0, inf);

    UnionFind uf(n);
    for (const Edge& e : sorted_edges(dist, inf)) {
        if (uf.unite(e.i, e.j)) diagram.add({0.0, e.weight, 0});
    }
    diagram.add({0.0, inf, 0});
    return diagram;
}

std::vector<double> mst_edge_weights(const DistanceMatrix& dist) {
    const std::size_t n = dist.size();
    std::vector<double> weights;
    if (n < 2) return weights;
    weights.reserve(n - 1);

    // Dense Prim: grow the tree from point 0, tracking for every outside
    // point its best distance into the tree. Ties resolve to the lowest
    // index by scan order.
    std::vector<char> in_tree(n, 0);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    in_tree[0] = 1;
    for (std::size_t j = 1; j < n; ++j) best[j] = dist(0, j);

    for (std::size_t step = 1; step < n; ++step) {
        std::size_t pick = n;
        double pick_w = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (!in_tree[j] && best[j] < pick_w) {
                pick_w = best[j];
                pick = j;
            }
        }
        in_tree[pick] = 1;
        weights.push_back(pick_w);
        for (std::size_t j = 0; j < n; ++j) {
            if (!in_tree[j]) best[j] = std::min(best[j], dist(pick, j));
        }
    }
    return weights;
}

double mst_total_length(const DistanceMatrix& dist) {
    double total = 0.0;
    for (double w : mst_edge_weights(dist)) total += w;
    return total;
}

namespace {

// Depth-first clique extension: a vertex tuple is a simplex iff all
// pairwise distances are under the threshold; its value is the running
// maximum. visit(vertices, value) is called for every clique of 2 or more
// vertices, in extension order.
template <typename Visitor>
void enumerate_cliques(const DistanceMatrix& dist, int max_simplex_dim,
                       double threshold, Visitor&& visit) {
    const std::size_t n = dist.size();
    if (max_simplex_dim < 1 || n < 2) return;
    std::vector<std::int32_t> stack;
    auto extend = [&](auto&& self, double value) -> void {
        if (static_cast<int>(stack.size()) > max_simplex_dim) return;
        const std::int32_t last = stack.back();
        for (std::int32_t v = last + 1; v < static_cast<std::int32_t>(n);
             ++v) {
            double new_value = value;
            bool ok = true;
            for (std::int32_t u : stack) {
                const double w = dist(u, v);
                if (w > threshold) {
                    ok = false;
                    break;
                }
                new_value = std::max(new_value, w);
            }
            if (!ok) continue;
            stack.push_back(v);
            visit(stack, new_value);
            self(self, new_value);
            stack.pop_back();
        }
    };
    for (std::size_t v = 0; v + 1 < n; ++v) {
        stack.assign(1, static_cast<std::int32_t>(v));
        extend(extend, 0.0);
    }
}

} // namespace

FiltrationOrder build_filtration(const DistanceMatrix& dist,
                                 int max_simplex_dim, double threshold,
                                 std::size_t cap) {
    const std::size_t n = dist.size();

    // Counting pass first, so an over-cap complex fails before anything is
    // materialized.
    std::size_t count = n;
    auto guard = [&] {
        if (count > cap)
            throw resource_limit_error(
                "simplex count exceeds cap: more than " + std::to_string(cap) +
                " simplices up to dimension " +
                std::to_string(max_simplex_dim) + " under threshold " +
                std::to_string(threshold));
    };
    guard();
    enumerate_cliques(dist, max_simplex_dim, threshold,
                      [&](const std::vector<std::int32_t>&, double) {
                          ++count;
                          guard();
                      });

    FiltrationOrder order;
    auto& simplices = order.simplices;
    simplices.reserve(count);
    for (std::size_t v = 0; v < n; ++v)
        simplices.push_back({{static_cast<std::int32_t>(v)}, 0.0});
    enumerate_cliques(dist, max_simplex_dim, threshold,
                      [&](const std::vector<std::int32_t>& vertices,
                          double value) {
                          simplices.push_back({vertices, value});
                      });

    std::sort(simplices.begin(), simplices.end(),
              [](const Simplex& a, const Simplex& b) {
                  if (a.value != b.value) return a.value < b.value;
                  const int da = a.dim(), db = b.dim();
                  if (da != db) return da < db;
                  return a.vertices < b.vertices;
              });
    return order;
}

namespace {

// Symmetric difference of two sorted row-index columns (Z/2 addition).
std::vector<std::int64_t> xor_columns(const std::vector<std::int64_t>& a,
                                      const std::vector<std::int64_t>& b) {
    std::vector<std::int64_t> out;
    out.reserve(a.size() + b.size());
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                  std::back_inserter(out));
    return out;
}

} // namespace

PersistenceDiagram rips_persistence(const DistanceMatrix& dist,
                                    const RipsParams& params) {
    if (params.max_dim < 0)
        throw std::invalid_argument("rips_persistence: max_dim must be >= 0");
    const std::size_t n = dist.size();
    const double threshold =
        params.threshold ? *params.threshold : enclosing_radius(dist);
    if (!(threshold >= 0.0) || !std::isfinite(threshold))
        throw std::invalid_argument(
            "rips_persistence: threshold must be finite and non-negative");

    const int max_dim = params.max_dim;
    const double inf = std::numeric_limits<double>::infinity();
    PersistenceDiagram diagram(max_dim, threshold);

    if (max_dim == 0) {
        // No matrix needed: union-find over the thresholded edges.
        UnionFind uf(n);
        std::size_t components = n;
        for (const Edge& e : sorted_edges(dist, threshold)) {
            if (uf.unite(e.i, e.j)) {
                diagram.add({0.0, e.weight, 0});
                --components;
            }
        }
        for (std::size_t c = 0; c < components; ++c)
            diagram.add({0.0, inf, 0});
        return diagram;
    }

    const FiltrationOrder filtration =
        build_filtration(dist, max_dim + 1, threshold, params.simplex_cap);
    const auto& simplices = filtration.simplices;
    const std::int64_t total = static_cast<std::int64_t>(simplices.size());

    // Global filtration position per simplex, keyed by vertex tuple.
    // Faces are looked up when assembling boundary columns.
    struct VertexTupleHash {
        std::size_t operator()(const std::vector<std::int32_t>& v) const {
            std::size_t h = 0xCBF29CE484222325ULL;
            for (std::int32_t x : v) {
                h ^= static_cast<std::size_t>(x) + 0x9E3779B9ULL + (h << 6) +
                     (h >> 2);
            }
            return h;
        }
    };
    std::unordered_map<std::vector<std::int32_t>, std::int64_t,
                       VertexTupleHash>
        position;
    position.reserve(simplices.size());
    for (std::int64_t p = 0; p < total; ++p)
        position.emplace(simplices[p].vertices, p);

    // Dimension-0 pass: union-find in filtration order marks which edges
    // merge components (negative edges). The rest are positive and give
    // birth to dimension-1 classes.
    std::vector<char> negative_edge(simplices.size(), 0);
    {
        UnionFind uf(n);
        std::size_t components = n;
        for (std::int64_t p = 0; p < total; ++p) {
            const Simplex& s = simplices[p];
            if (s.dim() != 1) continue;
            if (uf.unite(s.vertices[0], s.vertices[1])) {
                negative_edge[p] = 1;
                diagram.add({0.0, s.value, 0});
                --components;
            }
        }
        for (std::size_t c = 0; c < components; ++c)
            diagram.add({0.0, inf, 0});
    }

    // Twist reduction, top dimension first. pair_death[p] records the
    // filtration value of the column that kills the class born at simplex
    // p; cleared[p] marks known-positive simplices whose columns are
    // skipped in the next (lower-dimension) pass.
    std::vector<double> pair_death(simplices.size(),
                                   std::numeric_limits<double>::quiet_NaN());
    std::vector<char> cleared(simplices.size(), 0);
    std::vector<char> positive(simplices.size(), 0);

    std::vector<std::int64_t> pivot_owner(simplices.size(), -1);
    std::vector<std::vector<std::int64_t>> reduced(simplices.size());
    std::vector<std::int32_t> face;

    for (int d = max_dim + 1; d >= 2; --d) {
        for (std::int64_t p = 0; p < total; ++p) {
            const Simplex& s = simplices[p];
            if (s.dim() != d) continue;
            if (cleared[p]) continue;

            std::vector<std::int64_t> column;
            column.reserve(s.vertices.size());
            for (std::size_t skip = 0; skip < s.vertices.size(); ++skip) {
                face.clear();
                for (std::size_t v = 0; v < s.vertices.size(); ++v)
                    if (v != skip) face.push_back(s.vertices[v]);
                column.push_back(position.at(face));
            }
            std::sort(column.begin(), column.end());

            while (!column.empty()) {
                const std::int64_t pivot = column.back();
                const std::int64_t owner = pivot_owner[pivot];
                if (owner < 0) break;
                column = xor_columns(column, reduced[owner]);
            }

            if (column.empty()) {
                positive[p] = 1;
                continue;
            }
            const std::int64_t pivot = column.back();
            pivot_owner[pivot] = p;
            reduced[p] = std::move(column);
            pair_death[pivot] = s.value;
            cleared[pivot] = 1;
        }
    }

    // Births: positive d-simplices for 1 <= d <= max_dim. An edge is
    // positive iff union-find did not use it; higher simplices are positive
    // iff their column vanished or was cleared by the pass above.
    for (std::int64_t p = 0; p < total; ++p) {
        const Simplex& s = simplices[p];
        const int d = s.dim();
        if (d < 1 || d > max_dim) continue;
        bool is_positive;
        if (d == 1)
            is_positive = !negative_edge[p];
        else
            is_positive = positive[p] || cleared[p];
        if (!is_positive) continue;
        const double death = std::isnan(pair_death[p]) ? inf : pair_death[p];
        diagram.add({s.value, death, d});
    }

    return diagram;
}

} // namespace topodim
