#pragma once

#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "partition.hpp"

namespace gossip_coverage {

/// Generalized centroid of a region and the one-center cost it attains.
struct Centroid {
    Vertex vertex;
    double cost;
};

namespace detail {

// Everything in this namespace works in scaled length units (see
// WeightedGraph::length_unit) so uniform-weight costs are exact.

/// Sum over the subgraph of phi(k) * dist[k], in local (= vertex) order.
inline double weighted_sum(const InducedSubgraph& sub, std::span<const double> dist) {
    double total = 0.0;
    const auto phi = sub.phi();
    for (std::size_t k = 0; k < dist.size(); ++k)
        total += phi[k] * dist[k];
    return total;
}

/// Centroid of a connected induced subgraph. One sweep per candidate; the
/// first vertex (in vertex order) whose cost beats the running best by more
/// than `tolerance` wins, so ties go to the smallest id.
inline Centroid centroid_scaled(const InducedSubgraph& sub, double tolerance) {
    std::vector<double> dist(sub.size());
    Centroid best{sub.vertex(0), kInfinity};
    for (std::size_t h = 0; h < sub.size(); ++h) {
        sub.sweep(h, dist);
        const double cost = weighted_sum(sub, dist);
        if (cost < best.cost - tolerance)
            best = {sub.vertex(h), cost};
    }
    return best;
}

inline Centroid centroid_scaled(const WeightedGraph& g, std::span<const Vertex> region) {
    return centroid_scaled(InducedSubgraph(g, region), g.cost_tolerance());
}

} // namespace detail

/// H_1(h; region): phi-weighted sum of region-internal distances from h.
inline double one_center(const WeightedGraph& g, std::span<const Vertex> region, Vertex h) {
    const InducedSubgraph sub(g, region);
    const std::uint32_t local = sub.local_of(h);
    if (local == InducedSubgraph::npos)
        throw precondition_error("center " + std::to_string(h) + " is not in the region");
    if (!sub.connected())
        throw precondition_error("region is not connected");
    return detail::weighted_sum(sub, sub.sweep(local)) * g.length_unit();
}

inline Centroid centroid(const WeightedGraph& g, std::span<const Vertex> region) {
    if (region.empty())
        throw precondition_error("centroid of an empty region");
    const InducedSubgraph sub(g, region);
    if (!sub.connected())
        throw precondition_error("centroid of a disconnected region");
    Centroid c = detail::centroid_scaled(sub, g.cost_tolerance());
    c.cost *= g.length_unit();
    return c;
}

inline std::vector<Centroid> centroids(const WeightedGraph& g, const Partition& p) {
    std::vector<Centroid> out;
    out.reserve(p.size());
    for (Agent i = 0; i < p.size(); ++i)
        out.push_back(centroid(g, p[i]));
    return out;
}

/// Sum of H_1(centers[i]; p_i).
inline double multicenter(const WeightedGraph& g, const Partition& p, std::span<const Vertex> centers) {
    if (centers.size() != p.size())
        throw precondition_error("need exactly one center per region");
    double scaled = 0.0;
    for (Agent i = 0; i < p.size(); ++i) {
        const InducedSubgraph sub(g, p[i]);
        const std::uint32_t local = sub.local_of(centers[i]);
        if (local == InducedSubgraph::npos)
            throw precondition_error("center of region " + std::to_string(i + 1) + " lies outside the region");
        if (!sub.connected())
            throw precondition_error("region " + std::to_string(i + 1) + " is not connected");
        scaled += detail::weighted_sum(sub, sub.sweep(local));
    }
    return scaled * g.length_unit();
}

/// Multicenter cost of p evaluated at its own centroids.
inline double hexp(const WeightedGraph& g, const Partition& p) {
    require_valid(g, p);
    double scaled = 0.0;
    for (Agent i = 0; i < p.size(); ++i)
        scaled += detail::centroid_scaled(g, p[i]).cost;
    return scaled * g.length_unit();
}

} // namespace gossip_coverage
