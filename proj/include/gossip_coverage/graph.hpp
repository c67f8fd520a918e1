#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "error.hpp"

namespace gossip_coverage {

/// Vertex ids are dense indices 0..size()-1; their integer order is the
/// total order used for every tie-break.
using Vertex = std::uint32_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Edge {
    Vertex u;
    Vertex v;
    double weight;
};

/// Connected, undirected, positively weighted graph with a positive weight
/// (importance) per vertex. Immutable after construction.
///
/// Edge lengths are stored divided by a length unit. When every edge has the
/// same length the unit is that length, so internal distances are exact hop
/// counts and costs are accumulated in integer arithmetic whenever the vertex
/// weights are integers as well. Public distance and cost functions convert
/// back to true length units.
class WeightedGraph {
public:
    WeightedGraph(std::size_t vertex_count, std::span<const Edge> edges, std::vector<double> phi = {})
        : phi_(std::move(phi)) {
        if (vertex_count == 0)
            throw precondition_error("graph must have at least one vertex");
        if (vertex_count > std::numeric_limits<Vertex>::max())
            throw precondition_error("too many vertices");
        if (phi_.empty())
            phi_.assign(vertex_count, 1.0);
        if (phi_.size() != vertex_count)
            throw precondition_error("vertex weight count does not match vertex count");
        for (double w : phi_)
            if (!(w > 0.0) || !std::isfinite(w))
                throw precondition_error("vertex weights must be positive and finite");

        // Sort (u, v) with u < v and keep the lightest of any duplicate edges.
        std::vector<Edge> sorted;
        sorted.reserve(edges.size());
        for (const Edge& e : edges) {
            if (e.u >= vertex_count || e.v >= vertex_count)
                throw precondition_error("edge endpoint out of range");
            if (e.u == e.v)
                throw precondition_error("self-loops are not allowed");
            if (!(e.weight > 0.0) || !std::isfinite(e.weight))
                throw precondition_error("edge weights must be positive and finite");
            sorted.push_back(e.u < e.v ? e : Edge{e.v, e.u, e.weight});
        }
        std::sort(sorted.begin(), sorted.end(), [](const Edge& a, const Edge& b) {
            return std::tie(a.u, a.v, a.weight) < std::tie(b.u, b.v, b.weight);
        });
        sorted.erase(std::unique(sorted.begin(), sorted.end(),
                                 [](const Edge& a, const Edge& b) { return a.u == b.u && a.v == b.v; }),
                     sorted.end());
        edge_count_ = sorted.size();

        uniform_ = !sorted.empty() && std::all_of(sorted.begin(), sorted.end(), [&](const Edge& e) {
            return e.weight == sorted.front().weight;
        });
        unit_ = uniform_ ? sorted.front().weight : 1.0;

        offsets_.assign(vertex_count + 1, 0);
        for (const Edge& e : sorted) {
            ++offsets_[e.u + 1];
            ++offsets_[e.v + 1];
        }
        std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
        targets_.resize(offsets_.back());
        weights_.resize(offsets_.back());
        std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
        for (const Edge& e : sorted) {
            const double w = uniform_ ? 1.0 : e.weight;
            targets_[fill[e.u]] = e.v;
            weights_[fill[e.u]++] = w;
            targets_[fill[e.v]] = e.u;
            weights_[fill[e.v]++] = w;
        }
        // Neighbor lists come out sorted because edges were sorted by (u, v).

        if (!reaches_all())
            throw precondition_error("graph is not connected");

        const double total_phi = std::accumulate(phi_.begin(), phi_.end(), 0.0);
        const bool integral_phi =
            std::all_of(phi_.begin(), phi_.end(), [](double w) { return w == std::floor(w); });
        // Hop distances are at most |Q|, so sums stay below 2^53 under this bound.
        exact_ = (uniform_ || vertex_count == 1) && integral_phi &&
                 total_phi * static_cast<double>(vertex_count) < 0x1p52;
    }

    std::size_t size() const { return phi_.size(); }
    std::size_t edge_count() const { return edge_count_; }

    std::span<const Vertex> neighbors(Vertex v) const {
        return {targets_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }
    /// Edge lengths to neighbors(v), in length units of length_unit().
    std::span<const double> scaled_weights(Vertex v) const {
        return {weights_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }
    double edge_weight(Vertex u, Vertex v) const {
        const auto nb = neighbors(u);
        const auto it = std::lower_bound(nb.begin(), nb.end(), v);
        if (it == nb.end() || *it != v)
            return kInfinity;
        return weights_[offsets_[u] + static_cast<std::size_t>(it - nb.begin())] * unit_;
    }

    double phi(Vertex v) const { return phi_[v]; }
    std::span<const double> phi() const { return phi_; }

    bool uniform_weights() const { return uniform_; }
    double length_unit() const { return unit_; }
    /// True when all cost arithmetic is exact (integer-valued doubles).
    bool exact_arithmetic() const { return exact_; }
    /// Absolute tolerance used to compare costs in length units of length_unit().
    double cost_tolerance() const { return exact_ ? 0.0 : 1e-9; }

private:
    bool reaches_all() const {
        std::vector<char> seen(size(), 0);
        std::vector<Vertex> stack{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!stack.empty()) {
            const Vertex v = stack.back();
            stack.pop_back();
            for (Vertex w : neighbors(v))
                if (!seen[w]) {
                    seen[w] = 1;
                    ++count;
                    stack.push_back(w);
                }
        }
        return count == size();
    }

    std::vector<double> phi_;
    std::vector<std::size_t> offsets_;
    std::vector<Vertex> targets_;
    std::vector<double> weights_;
    std::size_t edge_count_ = 0;
    double unit_ = 1.0;
    bool uniform_ = false;
    bool exact_ = false;
};

enum class SweepMethod { automatic, breadth_first, dijkstra };

/// The subgraph G ∩ scope, re-indexed locally in ascending vertex order.
/// Local index k corresponds to vertices()[k], so local order is the vertex order.
class InducedSubgraph {
public:
    static constexpr std::uint32_t npos = std::numeric_limits<std::uint32_t>::max();

    InducedSubgraph(const WeightedGraph& g, std::span<const Vertex> scope)
        : vertices_(scope.begin(), scope.end()), uniform_(g.uniform_weights()) {
        std::sort(vertices_.begin(), vertices_.end());
        vertices_.erase(std::unique(vertices_.begin(), vertices_.end()), vertices_.end());
        if (!vertices_.empty() && vertices_.back() >= g.size())
            throw precondition_error("scope contains a vertex outside the graph");

        offsets_.reserve(vertices_.size() + 1);
        offsets_.push_back(0);
        phi_.reserve(vertices_.size());
        for (Vertex v : vertices_) {
            const auto nb = g.neighbors(v);
            const auto w = g.scaled_weights(v);
            for (std::size_t k = 0; k < nb.size(); ++k) {
                const std::uint32_t local = local_of(nb[k]);
                if (local != npos) {
                    targets_.push_back(local);
                    weights_.push_back(w[k]);
                }
            }
            offsets_.push_back(targets_.size());
            phi_.push_back(g.phi(v));
        }
    }

    std::size_t size() const { return vertices_.size(); }
    bool empty() const { return vertices_.empty(); }
    std::span<const Vertex> vertices() const { return vertices_; }
    Vertex vertex(std::size_t local) const { return vertices_[local]; }
    double phi(std::size_t local) const { return phi_[local]; }
    std::span<const double> phi() const { return phi_; }

    std::uint32_t local_of(Vertex v) const {
        const auto it = std::lower_bound(vertices_.begin(), vertices_.end(), v);
        if (it == vertices_.end() || *it != v)
            return npos;
        return static_cast<std::uint32_t>(it - vertices_.begin());
    }
    bool contains(Vertex v) const { return local_of(v) != npos; }

    std::span<const std::uint32_t> neighbors(std::size_t local) const {
        return {targets_.data() + offsets_[local], offsets_[local + 1] - offsets_[local]};
    }

    bool connected() const {
        if (empty())
            return false;
        std::vector<double> dist(size());
        sweep(0, dist);
        return std::none_of(dist.begin(), dist.end(), [](double d) { return d == kInfinity; });
    }

    /// One-to-all distances from `source` (local index) in scaled units,
    /// written to `out` (size() entries); +infinity where unreachable.
    void sweep(std::size_t source, std::span<double> out, SweepMethod method = SweepMethod::automatic) const {
        std::fill(out.begin(), out.end(), kInfinity);
        out[source] = 0.0;
        const bool bfs = method == SweepMethod::breadth_first ||
                         (method == SweepMethod::automatic && uniform_);
        if (bfs) {
            if (!uniform_)
                throw precondition_error("breadth-first sweep requires uniform edge weights");
            std::vector<std::uint32_t> queue;
            queue.reserve(size());
            queue.push_back(static_cast<std::uint32_t>(source));
            for (std::size_t head = 0; head < queue.size(); ++head) {
                const std::uint32_t v = queue[head];
                const double next = out[v] + 1.0;
                for (std::uint32_t w : neighbors(v))
                    if (out[w] == kInfinity) {
                        out[w] = next;
                        queue.push_back(w);
                    }
            }
            return;
        }
        using Item = std::pair<double, std::uint32_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        heap.emplace(0.0, static_cast<std::uint32_t>(source));
        while (!heap.empty()) {
            const auto [d, v] = heap.top();
            heap.pop();
            if (d > out[v])
                continue;
            for (std::size_t k = offsets_[v]; k < offsets_[v + 1]; ++k) {
                const std::uint32_t w = targets_[k];
                const double nd = d + weights_[k];
                if (nd < out[w]) {
                    out[w] = nd;
                    heap.emplace(nd, w);
                }
            }
        }
    }

    std::vector<double> sweep(std::size_t source) const {
        std::vector<double> out(size());
        sweep(source, out);
        return out;
    }

    /// Multi-source sweep: each vertex gets the distance to its nearest source
    /// and the smallest label among the sources attaining it. A vertex's label
    /// always equals the label of one of its shortest-path predecessors, so
    /// every label class is connected.
    /// `sources` are local indices; the label of sources[k] is k.
    void labeled_sweep(std::span<const std::uint32_t> sources, std::span<double> dist,
                       std::span<std::uint32_t> label) const {
        std::fill(dist.begin(), dist.end(), kInfinity);
        std::fill(label.begin(), label.end(), npos);
        if (uniform_) {
            // FIFO order keeps each BFS level sorted by label.
            std::vector<std::uint32_t> queue;
            queue.reserve(size());
            for (std::uint32_t k = 0; k < sources.size(); ++k) {
                dist[sources[k]] = 0.0;
                label[sources[k]] = k;
                queue.push_back(sources[k]);
            }
            for (std::size_t head = 0; head < queue.size(); ++head) {
                const std::uint32_t v = queue[head];
                for (std::uint32_t w : neighbors(v))
                    if (dist[w] == kInfinity) {
                        dist[w] = dist[v] + 1.0;
                        label[w] = label[v];
                        queue.push_back(w);
                    }
            }
            return;
        }
        using Item = std::tuple<double, std::uint32_t, std::uint32_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        for (std::uint32_t k = 0; k < sources.size(); ++k) {
            dist[sources[k]] = 0.0;
            label[sources[k]] = k;
            heap.emplace(0.0, k, sources[k]);
        }
        while (!heap.empty()) {
            const auto [d, l, v] = heap.top();
            heap.pop();
            if (d > dist[v] || l != label[v])
                continue;
            for (std::size_t k = offsets_[v]; k < offsets_[v + 1]; ++k) {
                const std::uint32_t w = targets_[k];
                const double nd = d + weights_[k];
                if (nd < dist[w] || (nd == dist[w] && l < label[w])) {
                    dist[w] = nd;
                    label[w] = l;
                    heap.emplace(nd, l, w);
                }
            }
        }
    }

private:
    std::vector<Vertex> vertices_;
    std::vector<std::size_t> offsets_;
    std::vector<std::uint32_t> targets_;
    std::vector<double> weights_;
    std::vector<double> phi_;
    bool uniform_;
};

/// Distances from one source within an induced subgraph, in length units.
struct DistanceTable {
    Vertex source;
    std::vector<Vertex> scope;
    /// Indexed by global vertex id; +infinity outside scope or unreachable.
    std::vector<double> dist;

    double operator[](Vertex v) const { return dist[v]; }
};

/// Geodesic distances from `source` within G ∩ scope.
inline DistanceTable shortest_paths(const WeightedGraph& g, std::span<const Vertex> scope, Vertex source,
                                    SweepMethod method = SweepMethod::automatic) {
    const InducedSubgraph sub(g, scope);
    const std::uint32_t local = sub.local_of(source);
    if (local == InducedSubgraph::npos)
        throw precondition_error("source vertex " + std::to_string(source) + " is not in scope");
    std::vector<double> scaled(sub.size());
    sub.sweep(local, scaled, method);

    DistanceTable table{source, std::vector<Vertex>(sub.vertices().begin(), sub.vertices().end()),
                        std::vector<double>(g.size(), kInfinity)};
    for (std::size_t k = 0; k < sub.size(); ++k)
        table.dist[sub.vertex(k)] = scaled[k] * g.length_unit();
    return table;
}

/// Whole-graph distances from `source`.
inline DistanceTable shortest_paths(const WeightedGraph& g, Vertex source) {
    std::vector<Vertex> all(g.size());
    std::iota(all.begin(), all.end(), Vertex{0});
    return shortest_paths(g, all, source);
}

/// True iff scope is nonempty and G ∩ scope is connected.
inline bool is_connected(const WeightedGraph& g, std::span<const Vertex> scope) {
    if (scope.empty())
        return false;
    return InducedSubgraph(g, scope).connected();
}

} // namespace gossip_coverage
