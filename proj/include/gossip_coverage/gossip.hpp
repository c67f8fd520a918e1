#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cost.hpp"
#include "error.hpp"
#include "graph.hpp"
#include "partition.hpp"
#include "rng.hpp"

namespace gossip_coverage {

struct GossipOptions {
    /// Weight each term of the pair cost D((a,b)) by phi(h), so D is the
    /// two-center analogue of H_1. With phi == 1 both variants coincide.
    bool weighted_pair_cost = true;
    /// Pick uniformly among all minimizing pairs instead of the
    /// lexicographically first one. Requires an Rng.
    bool random_tie_choice = false;
    /// Above this |p_i ∪ p_j| the exhaustive search (|u|^2 distance matrix)
    /// falls back to sampling `fallback_samples` pairs.
    std::size_t exhaustive_vertex_cap = 4096;
    std::size_t fallback_samples = 64;
};

/// Outcome of one pairwise update T_ij.
struct PairUpdateResult {
    Partition partition;
    bool changed = false;
    Agent i = 0;
    Agent j = 0;
    /// Hexp(new) - Hexp(old), length units; never positive.
    double cost_delta = 0.0;
    /// Centroids of regions i and j after the update.
    std::array<Centroid, 2> centroids{};
};

/// A candidate center pair (a < b) and its two-center cost D((a,b)).
struct CandidatePair {
    Vertex a;
    Vertex b;
    double d_cost;
};

namespace detail {

// Helpers below work in scaled units and local indices of an InducedSubgraph.

/// Two regions of a pair merged into u, remembering which side each came from.
struct MergedPair {
    std::vector<Vertex> u;
    std::vector<char> from_i;
};

inline MergedPair merge_pair(const Region& p_i, const Region& p_j) {
    MergedPair m;
    m.u.reserve(p_i.size() + p_j.size());
    m.from_i.reserve(p_i.size() + p_j.size());
    std::size_t a = 0, b = 0;
    while (a < p_i.size() || b < p_j.size()) {
        if (b == p_j.size() || (a < p_i.size() && p_i[a] < p_j[b])) {
            m.u.push_back(p_i[a++]);
            m.from_i.push_back(1);
        } else {
            m.u.push_back(p_j[b++]);
            m.from_i.push_back(0);
        }
    }
    return m;
}

/// D((a,b)) from the two distance rows. Accumulates in four interleaved lanes
/// so that the result does not depend on whether an early exit was requested;
/// returns +infinity as soon as the partial sum exceeds `stop_above`.
inline double pair_cost(std::span<const double> da, std::span<const double> db, std::span<const double> phi,
                        bool weighted, double stop_above) {
    constexpr std::size_t kBlock = 64;
    const std::size_t n = da.size();
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t h = 0;
    while (h + 4 <= n) {
        const std::size_t end = std::min(n - n % 4, h + kBlock);
        if (weighted) {
            for (; h < end; h += 4)
                for (std::size_t l = 0; l < 4; ++l)
                    acc[l] += phi[h + l] * (da[h + l] < db[h + l] ? da[h + l] : db[h + l]);
        } else {
            for (; h < end; h += 4)
                for (std::size_t l = 0; l < 4; ++l)
                    acc[l] += da[h + l] < db[h + l] ? da[h + l] : db[h + l];
        }
        if ((acc[0] + acc[1]) + (acc[2] + acc[3]) > stop_above)
            return kInfinity;
    }
    for (; h < n; ++h)
        acc[0] += (weighted ? phi[h] : 1.0) * std::min(da[h], db[h]);
    const double total = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    return total > stop_above ? kInfinity : total;
}

/// Lower bound on D((a, .)) for partners at distance r from a. By the
/// triangle inequality d(h,b) >= |d(h,a) - r|, so each term is at least
/// min(d, |d - r|) with d = d(h,a): d up to r/2, r - d up to r, d - r beyond.
class PairBound {
public:
    PairBound(std::span<const double> row, std::span<const double> phi, bool weighted) {
        std::vector<std::size_t> order(row.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return row[x] < row[y]; });
        dist_.reserve(row.size());
        weighted_dist_.reserve(row.size() + 1);
        weight_.reserve(row.size() + 1);
        weighted_dist_.push_back(0.0);
        weight_.push_back(0.0);
        for (std::size_t k : order) {
            const double w = weighted ? phi[k] : 1.0;
            dist_.push_back(row[k]);
            weighted_dist_.push_back(weighted_dist_.back() + w * row[k]);
            weight_.push_back(weight_.back() + w);
        }
    }

    double operator()(double r) const {
        const std::size_t near = count_up_to(0.5 * r);
        const std::size_t inside = count_up_to(r);
        const std::size_t n = dist_.size();
        return weighted_dist_[near] + (r * (weight_[inside] - weight_[near]) -
                                       (weighted_dist_[inside] - weighted_dist_[near])) +
               ((weighted_dist_[n] - weighted_dist_[inside]) - r * (weight_[n] - weight_[inside]));
    }

    /// Scale of the terms in operator(), for rounding slack.
    double magnitude(double r) const { return weighted_dist_.back() + r * weight_.back(); }

private:
    std::size_t count_up_to(double x) const {
        return static_cast<std::size_t>(std::upper_bound(dist_.begin(), dist_.end(), x) - dist_.begin());
    }

    std::vector<double> dist_;
    std::vector<double> weighted_dist_;
    std::vector<double> weight_;
};

/// Index of (a, b), a < b, in the lexicographic enumeration of pairs of n items.
inline std::uint64_t pair_index(std::uint64_t a, std::uint64_t b, std::uint64_t n) {
    return a * n - a * (a + 1) / 2 + (b - a - 1);
}

inline std::pair<std::uint32_t, std::uint32_t> pair_at(std::uint64_t index, std::uint64_t n) {
    std::uint64_t a = 0;
    while (index >= n - 1 - a) {
        index -= n - 1 - a;
        ++a;
    }
    return {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a + 1 + index)};
}

struct LocalPair {
    std::uint32_t a;
    std::uint32_t b;
    double d_cost;
};

/// From candidates evaluated in lexicographic order, pick the first (or a
/// random) pair within `tolerance` of the minimum.
inline LocalPair choose_minimizer(const std::vector<LocalPair>& evaluated, double tolerance, Rng* tie_rng) {
    double best = kInfinity;
    for (const LocalPair& c : evaluated)
        best = std::min(best, c.d_cost);
    std::vector<LocalPair> minimizers;
    for (const LocalPair& c : evaluated)
        if (c.d_cost <= best + tolerance)
            minimizers.push_back(c);
    if (tie_rng != nullptr && minimizers.size() > 1)
        return minimizers[tie_rng->uniform_below(minimizers.size())];
    return minimizers.front();
}

/// Exhaustive 2-median search over all pairs of the subgraph. `seed_pair`
/// (local indices) supplies an initial upper bound for pruning.
inline LocalPair best_pair_exhaustive(const InducedSubgraph& sub, bool weighted, double tolerance, bool exact,
                                      std::optional<std::pair<std::uint32_t, std::uint32_t>> seed_pair,
                                      Rng* tie_rng) {
    const std::size_t n = sub.size();
    std::vector<double> matrix(n * n);
    for (std::size_t a = 0; a < n; ++a)
        sub.sweep(a, std::span<double>(matrix.data() + a * n, n));
    auto row = [&](std::size_t a) { return std::span<const double>(matrix.data() + a * n, n); };

    std::vector<PairBound> bounds;
    bounds.reserve(n);
    for (std::size_t a = 0; a < n; ++a)
        bounds.emplace_back(row(a), sub.phi(), weighted);

    double best = kInfinity;
    if (seed_pair)
        best = pair_cost(row(seed_pair->first), row(seed_pair->second), sub.phi(), weighted, kInfinity);

    std::vector<LocalPair> evaluated;
    for (std::uint32_t a = 0; a < n; ++a) {
        for (std::uint32_t b = a + 1; b < n; ++b) {
            const double r = matrix[a * n + b];
            const double cut = best + tolerance;
            const double lower = std::max(bounds[a](r), bounds[b](r));
            // Rounding in the bound must never discard a true minimizer.
            if (exact ? lower > cut : lower - 1e-12 * std::max(bounds[a].magnitude(r), bounds[b].magnitude(r)) > cut)
                continue;
            const double d = pair_cost(row(a), row(b), sub.phi(), weighted, cut);
            if (d == kInfinity)
                continue;
            best = std::min(best, d);
            evaluated.push_back({a, b, d});
        }
    }
    return choose_minimizer(evaluated, tolerance, tie_rng);
}

/// Sampled search: the pair of previous centroids plus m-1 further distinct
/// pairs drawn uniformly from the rest. Two one-to-all sweeps per candidate.
inline LocalPair best_pair_sampled(const InducedSubgraph& sub, bool weighted, double tolerance,
                                   std::pair<std::uint32_t, std::uint32_t> first, std::size_t m, Rng& rng,
                                   Rng* tie_rng) {
    const std::uint64_t n = sub.size();
    const std::uint64_t total = n * (n - 1) / 2;
    const std::uint64_t first_index = pair_index(first.first, first.second, n);

    std::vector<std::pair<std::uint32_t, std::uint32_t>> candidates{first};
    for (std::uint64_t k : rng.sample_distinct(m - 1, total - 1))
        candidates.push_back(pair_at(k >= first_index ? k + 1 : k, n));
    std::sort(candidates.begin(), candidates.end());

    std::vector<double> da(n), db(n);
    std::vector<LocalPair> evaluated;
    evaluated.reserve(candidates.size());
    for (auto [a, b] : candidates) {
        sub.sweep(a, da);
        sub.sweep(b, db);
        evaluated.push_back({a, b, pair_cost(da, db, sub.phi(), weighted, kInfinity)});
    }
    return choose_minimizer(evaluated, tolerance, tie_rng);
}

/// Internal result of one pair update, scaled units.
struct PairOutcome {
    bool changed = false;
    Region region_i;
    Region region_j;
    Centroid centroid_i{};
    Centroid centroid_j{};
    double old_cost = 0.0;
    double new_cost = 0.0;
};

/// Lloyd-type gossip update for adjacent regions: Voronoi split of the union
/// by the old centroids, all ties to agent i.
inline PairOutcome lloyd_pair(const WeightedGraph& g, const Region& p_i, const Region& p_j) {
    const double tol = g.cost_tolerance();
    PairOutcome out;
    out.centroid_i = centroid_scaled(InducedSubgraph(g, p_i), tol);
    out.centroid_j = centroid_scaled(InducedSubgraph(g, p_j), tol);
    out.old_cost = out.new_cost = out.centroid_i.cost + out.centroid_j.cost;

    const MergedPair merged = merge_pair(p_i, p_j);
    const InducedSubgraph sub(g, merged.u);
    const std::vector<double> di = sub.sweep(sub.local_of(out.centroid_i.vertex));
    const std::vector<double> dj = sub.sweep(sub.local_of(out.centroid_j.vertex));

    bool moves = false;
    for (std::size_t k = 0; k < sub.size() && !moves; ++k)
        moves = merged.from_i[k] ? dj[k] < di[k] : di[k] < dj[k];
    if (!moves) {
        out.region_i = p_i;
        out.region_j = p_j;
        return out;
    }
    for (std::size_t k = 0; k < sub.size(); ++k)
        (di[k] <= dj[k] ? out.region_i : out.region_j).push_back(sub.vertex(k));
    out.centroid_i = centroid_scaled(InducedSubgraph(g, out.region_i), tol);
    out.centroid_j = centroid_scaled(InducedSubgraph(g, out.region_j), tol);
    out.new_cost = out.centroid_i.cost + out.centroid_j.cost;
    out.changed = out.region_i != p_i;
    return out;
}

/// Pairwise-optimal update for adjacent regions. `sample_count` == 0 selects
/// the exhaustive search; otherwise that many candidate pairs are sampled.
inline PairOutcome pairwise_pair(const WeightedGraph& g, const Region& p_i, const Region& p_j,
                                 const GossipOptions& options, std::size_t sample_count, Rng* rng) {
    const double tol = g.cost_tolerance();
    PairOutcome out;
    out.centroid_i = centroid_scaled(InducedSubgraph(g, p_i), tol);
    out.centroid_j = centroid_scaled(InducedSubgraph(g, p_j), tol);
    out.old_cost = out.new_cost = out.centroid_i.cost + out.centroid_j.cost;

    const MergedPair merged = merge_pair(p_i, p_j);
    const InducedSubgraph sub(g, merged.u);
    const std::uint32_t ci = sub.local_of(out.centroid_i.vertex);
    const std::uint32_t cj = sub.local_of(out.centroid_j.vertex);
    const std::pair<std::uint32_t, std::uint32_t> centroid_pair{std::min(ci, cj), std::max(ci, cj)};
    Rng* tie_rng = options.random_tie_choice ? rng : nullptr;
    if (options.random_tie_choice && rng == nullptr)
        throw precondition_error("random tie choice needs a random generator");

    if (sample_count == 0 && sub.size() > options.exhaustive_vertex_cap)
        sample_count = options.fallback_samples;
    LocalPair chosen{};
    if (sample_count == 0) {
        chosen = best_pair_exhaustive(sub, options.weighted_pair_cost, tol, g.exact_arithmetic(), centroid_pair,
                                      tie_rng);
    } else {
        Rng fallback(mix_seed(merged.u.size() * 0x100000001ULL + merged.u.front()));
        chosen = best_pair_sampled(sub, options.weighted_pair_cost, tol, centroid_pair, sample_count,
                                   rng != nullptr ? *rng : fallback, tie_rng);
    }

    const std::vector<double> da = sub.sweep(chosen.a);
    const std::vector<double> db = sub.sweep(chosen.b);
    Region w_a, w_b;
    for (std::size_t k = 0; k < sub.size(); ++k)
        (da[k] <= db[k] ? w_a : w_b).push_back(sub.vertex(k));

    const Centroid c_a = centroid_scaled(InducedSubgraph(g, w_a), tol);
    const Centroid c_b = centroid_scaled(InducedSubgraph(g, w_b), tol);
    if (c_a.cost + c_b.cost < out.old_cost - tol) {
        out.changed = true;
        out.region_i = std::move(w_a);
        out.region_j = std::move(w_b);
        out.centroid_i = c_a;
        out.centroid_j = c_b;
        out.new_cost = c_a.cost + c_b.cost;
    } else {
        out.region_i = p_i;
        out.region_j = p_j;
    }
    return out;
}

inline void require_pair(const WeightedGraph& g, const Partition& p, Agent i, Agent j) {
    if (i >= j)
        throw precondition_error("pair update requires i < j");
    if (j >= p.size())
        throw precondition_error("agent index out of range");
    require_valid(g, p);
}

inline PairUpdateResult to_result(const WeightedGraph& g, const Partition& p, Agent i, Agent j,
                                  PairOutcome&& o) {
    PairUpdateResult r;
    r.i = i;
    r.j = j;
    r.changed = o.changed;
    r.cost_delta = (o.new_cost - o.old_cost) * g.length_unit();
    r.centroids = {Centroid{o.centroid_i.vertex, o.centroid_i.cost * g.length_unit()},
                   Centroid{o.centroid_j.vertex, o.centroid_j.cost * g.length_unit()}};
    r.partition = o.changed ? p.with_pair(i, std::move(o.region_i), j, std::move(o.region_j)) : p;
    return r;
}

inline PairUpdateResult identity_result(const WeightedGraph& g, const Partition& p, Agent i, Agent j) {
    PairUpdateResult r;
    r.partition = p;
    r.i = i;
    r.j = j;
    r.centroids = {centroid(g, p[i]), centroid(g, p[j])};
    return r;
}

inline bool pair_adjacent(const WeightedGraph& g, const Partition& p, Agent i, Agent j) {
    const auto owner = owner_map(g, p);
    return regions_adjacent(g, owner, p[i], j);
}

} // namespace detail

/// Lloyd-type gossip map T_ij. Identity when the regions are not adjacent or
/// no vertex is strictly closer to the other agent's centroid.
inline PairUpdateResult lloyd_gossip_step(const WeightedGraph& g, const Partition& p, Agent i, Agent j) {
    detail::require_pair(g, p, i, j);
    if (!detail::pair_adjacent(g, p, i, j))
        return detail::identity_result(g, p, i, j);
    return detail::to_result(g, p, i, j, detail::lloyd_pair(g, p[i], p[j]));
}

/// Best center pair of a connected vertex set u by exhaustive search: the
/// lexicographically first pair minimizing D.
inline CandidatePair pairwise_candidates(const WeightedGraph& g, std::span<const Vertex> u,
                                         const GossipOptions& options = {}) {
    const InducedSubgraph sub(g, u);
    if (sub.size() < 2)
        throw precondition_error("pair search needs at least two vertices");
    if (!sub.connected())
        throw precondition_error("pair search needs a connected vertex set");
    const detail::LocalPair best = detail::best_pair_exhaustive(sub, options.weighted_pair_cost,
                                                                g.cost_tolerance(), g.exact_arithmetic(),
                                                                std::nullopt, nullptr);
    return {sub.vertex(best.a), sub.vertex(best.b), best.d_cost * g.length_unit()};
}

/// Pairwise-optimal gossip map T_ij with exhaustive pair search. `rng` is only
/// consulted for random tie choice or when the union exceeds the exhaustive cap.
inline PairUpdateResult pairwise_optimal_step(const WeightedGraph& g, const Partition& p, Agent i, Agent j,
                                              const GossipOptions& options = {}, Rng* rng = nullptr) {
    detail::require_pair(g, p, i, j);
    if (!detail::pair_adjacent(g, p, i, j))
        return detail::identity_result(g, p, i, j);
    return detail::to_result(g, p, i, j, detail::pairwise_pair(g, p[i], p[j], options, 0, rng));
}

/// Pairwise-optimal gossip map T_ij restricted to m candidate pairs: the
/// previous centroids plus m-1 pairs sampled without replacement.
inline PairUpdateResult pairwise_sampled_step(const WeightedGraph& g, const Partition& p, Agent i, Agent j,
                                              std::size_t m, Rng& rng, const GossipOptions& options = {}) {
    if (m < 1)
        throw precondition_error("sample count must be at least 1");
    detail::require_pair(g, p, i, j);
    if (!detail::pair_adjacent(g, p, i, j))
        return detail::identity_result(g, p, i, j);
    return detail::to_result(g, p, i, j, detail::pairwise_pair(g, p[i], p[j], options, m, &rng));
}

struct CentralizedResult {
    Partition partition;
    std::size_t iterations = 0;
    bool converged = false;
    /// Set if two regions ever produced the same centroid vertex.
    bool collision = false;
    /// Hexp of the partition at the start of every iteration, then the final one.
    std::vector<double> costs;
};

namespace detail {

/// Centroids of every region; colliding centroids keep the lower agent's
/// claim and move the other agent to its cheapest unclaimed vertex.
inline std::vector<Vertex> distinct_centers(const WeightedGraph& g, const Partition& p, double& scaled_cost,
                                            bool& collision) {
    const double tol = g.cost_tolerance();
    std::vector<Vertex> centers;
    std::vector<char> claimed(g.size(), 0);
    scaled_cost = 0.0;
    for (Agent i = 0; i < p.size(); ++i) {
        const InducedSubgraph sub(g, p[i]);
        Centroid c = centroid_scaled(sub, tol);
        scaled_cost += c.cost;
        if (claimed[c.vertex]) {
            collision = true;
            std::vector<double> dist(sub.size());
            double best = kInfinity;
            for (std::size_t h = 0; h < sub.size(); ++h) {
                if (claimed[sub.vertex(h)])
                    continue;
                sub.sweep(h, dist);
                const double cost = weighted_sum(sub, dist);
                if (cost < best - tol) {
                    best = cost;
                    c.vertex = sub.vertex(h);
                }
            }
            if (best == kInfinity)
                throw precondition_error("cannot find distinct centers");
        }
        claimed[c.vertex] = 1;
        centers.push_back(c.vertex);
    }
    return centers;
}

} // namespace detail

/// Centralized Lloyd iteration: centroids of all regions, then the Voronoi
/// partition of the whole graph they generate, until a fixed point.
inline CentralizedResult centralized_lloyd(const WeightedGraph& g, const Partition& p0, std::size_t max_iters) {
    require_valid(g, p0);
    CentralizedResult result;
    result.partition = p0;
    for (std::size_t it = 1; it <= max_iters; ++it) {
        double scaled = 0.0;
        const std::vector<Vertex> centers = detail::distinct_centers(g, result.partition, scaled, result.collision);
        result.costs.push_back(scaled * g.length_unit());
        result.iterations = it;
        Partition next = voronoi_partition(g, centers);
        if (next == result.partition) {
            result.converged = true;
            return result;
        }
        result.partition = std::move(next);
    }
    result.costs.push_back(hexp(g, result.partition));
    return result;
}

/// A vertex of region i strictly closer (within p_i ∪ p_j) to the centroid
/// of an adjacent region j than to its own centroid.
struct PairViolation {
    Agent i;
    Agent j;
    Vertex vertex;
};

/// First violation of the centroidal-Voronoi-in-pairs condition, if any.
inline std::optional<PairViolation> find_pair_voronoi_violation(const WeightedGraph& g, const Partition& p) {
    const AdjacencyGraph adj = adjacency(g, p);
    const double tol = g.cost_tolerance();
    std::vector<Centroid> cs;
    for (Agent i = 0; i < p.size(); ++i)
        cs.push_back(detail::centroid_scaled(InducedSubgraph(g, p[i]), tol));
    for (auto [i, j] : adj.edges()) {
        const detail::MergedPair merged = detail::merge_pair(p[i], p[j]);
        const InducedSubgraph sub(g, merged.u);
        const auto di = sub.sweep(sub.local_of(cs[i].vertex));
        const auto dj = sub.sweep(sub.local_of(cs[j].vertex));
        for (std::size_t k = 0; k < sub.size(); ++k) {
            if (merged.from_i[k] && di[k] > dj[k] + tol)
                return PairViolation{i, j, sub.vertex(k)};
            if (!merged.from_i[k] && dj[k] > di[k] + tol)
                return PairViolation{j, i, sub.vertex(k)};
        }
    }
    return std::nullopt;
}

inline bool centroidal_voronoi_in_pairs(const WeightedGraph& g, const Partition& p) {
    return !find_pair_voronoi_violation(g, p).has_value();
}

/// Whether no adjacent pair is changed by the exhaustive pairwise-optimal map.
inline bool is_pairwise_optimal(const WeightedGraph& g, const Partition& p, const GossipOptions& options = {}) {
    const AdjacencyGraph adj = adjacency(g, p);
    for (auto [i, j] : adj.edges())
        if (detail::pairwise_pair(g, p[i], p[j], options, 0, nullptr).changed)
            return false;
    return true;
}

} // namespace gossip_coverage
