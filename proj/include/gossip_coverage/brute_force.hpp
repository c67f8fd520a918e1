#pragma once

#include <cstdint>
#include <vector>

#include "cost.hpp"
#include "error.hpp"
#include "graph.hpp"
#include "partition.hpp"

namespace gossip_coverage {

struct KMedianOptimum {
    std::vector<Vertex> centers;
    /// Minimum over center sets of sum_h phi(h) * min_i d_Q(h, c_i), length units.
    double cost = 0.0;
    /// Voronoi partition of the optimal centers; its Hexp equals `cost`.
    Partition partition;
};

/// Exact minimum of Hexp over connected n-partitions, by enumerating all
/// n-subsets of vertices as centers (the minimum over partitions equals the
/// graph n-median optimum). Exponential; limited to n <= 3 and |Q| <= max_vertices.
inline KMedianOptimum brute_force_optimum(const WeightedGraph& g, std::size_t n, std::size_t max_vertices = 200) {
    if (n < 1 || n > 3)
        throw precondition_error("brute force supports 1 to 3 agents");
    if (g.size() > max_vertices)
        throw precondition_error("graph has " + std::to_string(g.size()) + " vertices; brute force cap is " +
                                 std::to_string(max_vertices));
    if (n > g.size())
        throw precondition_error("more agents than vertices");

    const std::size_t q = g.size();
    std::vector<Vertex> all(q);
    for (Vertex v = 0; v < q; ++v)
        all[v] = v;
    const InducedSubgraph whole(g, all);
    std::vector<double> dist(q * q);
    for (std::size_t a = 0; a < q; ++a)
        whole.sweep(a, std::span<double>(dist.data() + a * q, q));
    const double tol = g.cost_tolerance();

    std::vector<double> nearest(q);
    KMedianOptimum best;
    double best_scaled = kInfinity;
    std::vector<Vertex> c(n);
    // Lexicographic enumeration; strict improvement keeps the first optimum.
    auto consider = [&] {
        double total = 0.0;
        for (std::size_t h = 0; h < q; ++h) {
            double m = kInfinity;
            for (Vertex ci : c)
                m = std::min(m, dist[ci * q + h]);
            total += g.phi(static_cast<Vertex>(h)) * m;
        }
        if (total < best_scaled - tol) {
            best_scaled = total;
            best.centers = c;
        }
    };
    for (c[0] = 0; c[0] < q; ++c[0]) {
        if (n == 1) {
            consider();
            continue;
        }
        for (c[1] = c[0] + 1; c[1] < q; ++c[1]) {
            if (n == 2) {
                consider();
                continue;
            }
            for (c[2] = c[1] + 1; c[2] < q; ++c[2])
                consider();
        }
    }
    best.cost = best_scaled * g.length_unit();
    best.partition = voronoi_partition(g, best.centers);
    return best;
}

} // namespace gossip_coverage
