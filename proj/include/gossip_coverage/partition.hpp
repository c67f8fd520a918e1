#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "rng.hpp"

namespace gossip_coverage {

using Region = std::vector<Vertex>;
using Agent = std::size_t;

/// N vertex subsets indexed by agent id (0-based). Each region is kept
/// sorted ascending and free of duplicates; nothing else is enforced here,
/// see validate().
class Partition {
public:
    Partition() = default;
    explicit Partition(std::vector<Region> regions) : regions_(std::move(regions)) {
        for (Region& r : regions_) {
            std::sort(r.begin(), r.end());
            r.erase(std::unique(r.begin(), r.end()), r.end());
        }
    }

    std::size_t size() const { return regions_.size(); }
    const Region& operator[](Agent i) const { return regions_[i]; }
    const std::vector<Region>& regions() const { return regions_; }

    /// Copy with regions i and j replaced.
    Partition with_pair(Agent i, Region region_i, Agent j, Region region_j) const {
        Partition out = *this;
        out.regions_[i] = std::move(region_i);
        out.regions_[j] = std::move(region_j);
        return out;
    }

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    std::vector<Region> regions_;
};

enum class PartitionDefect { vertex_out_of_range, not_covering, overlapping, empty_region, disconnected_region };

struct Violation {
    PartitionDefect defect;
    Agent agent;   // offending region, where meaningful
    Vertex vertex; // offending vertex, where meaningful
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    explicit operator bool() const { return ok(); }
    bool has(PartitionDefect d) const {
        return std::any_of(violations.begin(), violations.end(), [d](const Violation& v) { return v.defect == d; });
    }
};

/// Checks the four connected-partition conditions: covering, pairwise
/// disjoint, nonempty, connected.
inline ValidationReport validate(const WeightedGraph& g, const Partition& p) {
    ValidationReport report;
    std::vector<std::uint32_t> count(g.size(), 0);
    for (Agent i = 0; i < p.size(); ++i) {
        if (p[i].empty()) {
            report.violations.push_back({PartitionDefect::empty_region, i, 0});
            continue;
        }
        bool in_range = true;
        for (Vertex v : p[i]) {
            if (v >= g.size()) {
                report.violations.push_back({PartitionDefect::vertex_out_of_range, i, v});
                in_range = false;
                continue;
            }
            if (++count[v] == 2)
                report.violations.push_back({PartitionDefect::overlapping, i, v});
        }
        if (in_range && !is_connected(g, p[i]))
            report.violations.push_back({PartitionDefect::disconnected_region, i, p[i].front()});
    }
    for (Vertex v = 0; v < g.size(); ++v)
        if (count[v] == 0)
            report.violations.push_back({PartitionDefect::not_covering, p.size(), v});
    return report;
}

inline std::string describe(const Violation& v) {
    switch (v.defect) {
    case PartitionDefect::vertex_out_of_range:
        return "region " + std::to_string(v.agent + 1) + " contains unknown vertex " + std::to_string(v.vertex + 1);
    case PartitionDefect::not_covering:
        return "vertex " + std::to_string(v.vertex + 1) + " is not in any region";
    case PartitionDefect::overlapping:
        return "vertex " + std::to_string(v.vertex + 1) + " is in more than one region";
    case PartitionDefect::empty_region:
        return "region " + std::to_string(v.agent + 1) + " is empty";
    case PartitionDefect::disconnected_region:
        return "region " + std::to_string(v.agent + 1) + " is not connected";
    }
    return "unknown defect";
}

inline void require_valid(const WeightedGraph& g, const Partition& p) {
    const ValidationReport report = validate(g, p);
    if (!report.ok())
        throw precondition_error("invalid partition: " + describe(report.violations.front()));
}

/// owner[v] = agent whose region holds v. Assumes p is valid.
inline std::vector<std::uint32_t> owner_map(const WeightedGraph& g, const Partition& p) {
    std::vector<std::uint32_t> owner(g.size(), InducedSubgraph::npos);
    for (Agent i = 0; i < p.size(); ++i)
        for (Vertex v : p[i])
            owner[v] = static_cast<std::uint32_t>(i);
    return owner;
}

/// Whether regions a and b share a graph edge, given the owner map.
inline bool regions_adjacent(const WeightedGraph& g, std::span<const std::uint32_t> owner, const Region& a,
                             Agent b) {
    for (Vertex v : a)
        for (Vertex w : g.neighbors(v))
            if (owner[w] == b)
                return true;
    return false;
}

class AdjacencyGraph {
public:
    AdjacencyGraph(std::size_t agents, std::vector<std::pair<Agent, Agent>> edges)
        : agents_(agents), edges_(std::move(edges)), matrix_(agents * agents, 0) {
        std::sort(edges_.begin(), edges_.end());
        edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
        for (auto [i, j] : edges_)
            matrix_[i * agents_ + j] = matrix_[j * agents_ + i] = 1;
    }

    std::size_t agents() const { return agents_; }
    /// Unordered pairs (i, j), i < j, in lexicographic order.
    const std::vector<std::pair<Agent, Agent>>& edges() const { return edges_; }
    bool adjacent(Agent i, Agent j) const { return matrix_[i * agents_ + j] != 0; }

    bool connected() const {
        if (agents_ == 0)
            return false;
        std::vector<char> seen(agents_, 0);
        std::vector<Agent> stack{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!stack.empty()) {
            const Agent i = stack.back();
            stack.pop_back();
            for (Agent j = 0; j < agents_; ++j)
                if (adjacent(i, j) && !seen[j]) {
                    seen[j] = 1;
                    ++count;
                    stack.push_back(j);
                }
        }
        return count == agents_;
    }

private:
    std::size_t agents_;
    std::vector<std::pair<Agent, Agent>> edges_;
    std::vector<char> matrix_;
};

namespace detail {

inline AdjacencyGraph adjacency_from_owner(const WeightedGraph& g, std::span<const std::uint32_t> owner,
                                           std::size_t agents) {
    std::vector<std::pair<Agent, Agent>> edges;
    for (Vertex v = 0; v < g.size(); ++v)
        for (Vertex w : g.neighbors(v))
            if (v < w && owner[v] != owner[w])
                edges.emplace_back(std::min(owner[v], owner[w]), std::max(owner[v], owner[w]));
    return AdjacencyGraph(agents, std::move(edges));
}

} // namespace detail

/// Adjacency graph between the regions of a valid partition.
inline AdjacencyGraph adjacency(const WeightedGraph& g, const Partition& p) {
    require_valid(g, p);
    return detail::adjacency_from_owner(g, owner_map(g, p), p.size());
}

/// Voronoi partition generated by distinct `seeds` under whole-graph
/// distances. Each vertex goes to the nearest seed; ties go to the lowest
/// agent index. The assignment is computed by a multi-source sweep in which
/// every vertex inherits the label of a shortest-path predecessor, so each
/// cell is connected.
inline Partition voronoi_partition(const WeightedGraph& g, std::span<const Vertex> seeds) {
    if (seeds.empty())
        throw precondition_error("voronoi_partition needs at least one seed");
    if (seeds.size() > g.size())
        throw precondition_error("more seeds than vertices");
    std::vector<Vertex> sorted(seeds.begin(), seeds.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw precondition_error("voronoi seeds must be distinct");
    if (sorted.back() >= g.size())
        throw precondition_error("voronoi seed outside the graph");

    std::vector<Vertex> all(g.size());
    std::iota(all.begin(), all.end(), Vertex{0});
    const InducedSubgraph whole(g, all);
    std::vector<std::uint32_t> sources(seeds.begin(), seeds.end()); // local == global here
    std::vector<double> dist(g.size());
    std::vector<std::uint32_t> label(g.size());
    whole.labeled_sweep(sources, dist, label);

    std::vector<Region> regions(seeds.size());
    for (Vertex v = 0; v < g.size(); ++v)
        regions[label[v]].push_back(v);
    return Partition(std::move(regions));
}

/// Random connected n-partition: n distinct seed vertices drawn uniformly
/// (Floyd sampling, then a Fisher-Yates shuffle to assign them to agents),
/// followed by voronoi_partition.
inline Partition random_partition(const WeightedGraph& g, std::size_t n, std::uint64_t seed) {
    if (n == 0)
        throw precondition_error("agent count must be positive");
    if (n > g.size())
        throw precondition_error("agent count " + std::to_string(n) + " exceeds vertex count " +
                                 std::to_string(g.size()));
    Rng rng(seed);
    const auto picked = rng.sample_distinct(n, g.size());
    std::vector<Vertex> seeds(picked.begin(), picked.end());
    rng.shuffle(std::span<Vertex>(seeds));
    return voronoi_partition(g, seeds);
}

// Text format: one line per agent, "agent_id: v1 v2 ...", ids 1-based.

inline void write_partition(std::ostream& out, const Partition& p) {
    for (Agent i = 0; i < p.size(); ++i) {
        out << (i + 1) << ':';
        for (Vertex v : p[i])
            out << ' ' << (v + 1);
        out << '\n';
    }
}

inline std::string format_partition(const Partition& p) {
    std::ostringstream out;
    write_partition(out, p);
    return out.str();
}

inline Partition read_partition(std::istream& in) {
    std::vector<std::pair<std::size_t, Region>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos)
            throw input_error("partition line " + std::to_string(line_no) + ": missing ':'");
        std::istringstream head(line.substr(0, colon));
        long long agent = 0;
        if (!(head >> agent) || agent < 1)
            throw input_error("partition line " + std::to_string(line_no) + ": bad agent id");
        std::istringstream body(line.substr(colon + 1));
        Region region;
        long long v = 0;
        while (body >> v) {
            if (v < 1)
                throw input_error("partition line " + std::to_string(line_no) + ": bad vertex id");
            region.push_back(static_cast<Vertex>(v - 1));
        }
        if (!body.eof())
            throw input_error("partition line " + std::to_string(line_no) + ": unparsable vertex list");
        rows.emplace_back(static_cast<std::size_t>(agent), std::move(region));
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Region> regions;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k].first != k + 1)
            throw input_error("partition agent ids must be exactly 1..N");
        regions.push_back(std::move(rows[k].second));
    }
    return Partition(std::move(regions));
}

inline Partition parse_partition(const std::string& text) {
    std::istringstream in(text);
    return read_partition(in);
}

} // namespace gossip_coverage
