#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "cost.hpp"
#include "error.hpp"
#include "gossip.hpp"
#include "graph.hpp"
#include "partition.hpp"
#include "rng.hpp"

namespace gossip_coverage {

enum class Algorithm { lloyd_gossip, pairwise, pairwise_sampled, centralized };

struct AlgorithmConfig {
    Algorithm kind = Algorithm::pairwise;
    /// Candidate pairs per update for pairwise_sampled.
    std::size_t samples = 10;
    GossipOptions options{};
};

inline std::string_view algorithm_name(Algorithm a) {
    switch (a) {
    case Algorithm::lloyd_gossip: return "lloyd-gossip";
    case Algorithm::pairwise: return "pairwise";
    case Algorithm::pairwise_sampled: return "pairwise-sampled";
    case Algorithm::centralized: return "lloyd-central";
    }
    return "unknown";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view name) {
    for (Algorithm a : {Algorithm::lloyd_gossip, Algorithm::pairwise, Algorithm::pairwise_sampled,
                        Algorithm::centralized})
        if (algorithm_name(a) == name)
            return a;
    return std::nullopt;
}

enum class ScheduleKind { round_robin, uniform_random };

/// Which pairs the scheduler draws from. Drawing from all pairs keeps the
/// persistence property independent of the current adjacency; T_ij is the
/// identity on non-adjacent pairs.
enum class PairDomain { all_pairs, adjacent_pairs };

struct Schedule {
    ScheduleKind kind = ScheduleKind::round_robin;
    PairDomain domain = PairDomain::all_pairs;
    std::uint64_t seed = 0;
};

/// Produces the sequence of agent pairs.
///
/// Round-robin visits the N(N-1)/2 unordered pairs in lexicographic order, so
/// every pair recurs within period() steps. Uniform-random draws each pair
/// with probability 1/period() at every step, independently of the past.
/// In the adjacent-pairs domain both kinds restrict themselves to the
/// currently adjacent pairs.
class PairScheduler {
public:
    PairScheduler(std::size_t agents, const Schedule& schedule) : schedule_(schedule), rng_(schedule.seed) {
        for (Agent i = 0; i < agents; ++i)
            for (Agent j = i + 1; j < agents; ++j)
                pairs_.emplace_back(i, j);
    }

    std::size_t period() const { return pairs_.size(); }

    std::pair<Agent, Agent> next(const AdjacencyGraph& adjacency) {
        if (schedule_.domain == PairDomain::adjacent_pairs) {
            const auto& edges = adjacency.edges();
            if (schedule_.kind == ScheduleKind::uniform_random)
                return edges[rng_.uniform_below(edges.size())];
            for (;;) {
                const auto pair = pairs_[cursor_];
                cursor_ = (cursor_ + 1) % pairs_.size();
                if (adjacency.adjacent(pair.first, pair.second))
                    return pair;
            }
        }
        if (schedule_.kind == ScheduleKind::uniform_random)
            return pairs_[rng_.uniform_below(pairs_.size())];
        const auto pair = pairs_[cursor_];
        cursor_ = (cursor_ + 1) % pairs_.size();
        return pair;
    }

private:
    Schedule schedule_;
    Rng rng_;
    std::vector<std::pair<Agent, Agent>> pairs_;
    std::size_t cursor_ = 0;
};

struct StepRecord {
    std::size_t step;
    double cost;
    bool changed;
    /// Pair selected at this step; (0, 0) for the initial record and for
    /// centralized iterations.
    Agent i;
    Agent j;
};

struct TrialResult {
    /// Hexp after every step, starting with the initial partition at step 0.
    std::vector<StepRecord> trajectory;
    Partition final_partition;
    /// Step at which the fixed-point certificate was complete.
    std::optional<std::size_t> converged_at;
    /// Number of steps that changed the partition.
    std::size_t exchanges = 0;
    std::uint64_t seed = 0;

    double final_cost() const { return trajectory.back().cost; }
};

/// Passed to the optional per-step observer of run().
struct StepEvent {
    std::size_t step;
    Agent i;
    Agent j;
    bool changed;
    const Partition& partition;
    double cost;
};

using StepObserver = std::function<void(const StepEvent&)>;

inline constexpr std::size_t kDefaultMaxSteps = 10000;

namespace detail {

inline TrialResult run_centralized(const WeightedGraph& g, const Partition& p0, std::size_t max_steps,
                                   std::uint64_t seed, const StepObserver& observer) {
    TrialResult result;
    result.seed = seed;
    Partition current = p0;
    double cost = hexp(g, current);
    result.trajectory.push_back({0, cost, false, 0, 0});
    for (std::size_t t = 1; t <= max_steps; ++t) {
        double scaled = 0.0;
        bool collision = false;
        const std::vector<Vertex> centers = distinct_centers(g, current, scaled, collision);
        Partition next = voronoi_partition(g, centers);
        const bool changed = next != current;
        if (changed) {
            current = std::move(next);
            cost = hexp(g, current);
            ++result.exchanges;
        }
        result.trajectory.push_back({t, cost, changed, 0, 0});
        if (observer)
            observer({t, 0, 0, changed, current, cost});
        if (!changed) {
            result.converged_at = t;
            break;
        }
    }
    result.final_partition = std::move(current);
    return result;
}

} // namespace detail

/// Runs one simulation from p0 until the convergence certificate holds or
/// max_steps steps have been taken.
///
/// Every step applies T_ij for the scheduled pair (identity when the pair is
/// not adjacent) and records Hexp. A pair counts as certified once it has been
/// attempted without change; any change anywhere clears all certificates.
/// The run has converged when every currently adjacent pair is certified, so
/// the final partition is then a fixed point of every T_ij.
///
/// For centralized Lloyd one step is one full centering/partitioning
/// iteration and the schedule is unused.
inline TrialResult run(const WeightedGraph& g, const Partition& p0, const AlgorithmConfig& algorithm,
                       const Schedule& schedule, std::size_t max_steps = kDefaultMaxSteps,
                       const StepObserver& observer = {}) {
    if (max_steps < 1)
        throw precondition_error("max_steps must be at least 1");
    require_valid(g, p0);
    if (algorithm.kind == Algorithm::centralized)
        return detail::run_centralized(g, p0, max_steps, schedule.seed, observer);
    if (algorithm.kind == Algorithm::pairwise_sampled && algorithm.samples < 1)
        throw precondition_error("sample count must be at least 1");

    const std::size_t n = p0.size();
    const double unit = g.length_unit();
    TrialResult result;
    result.seed = schedule.seed;

    Partition current = p0;
    std::vector<std::uint32_t> owner = owner_map(g, current);
    AdjacencyGraph adj = detail::adjacency_from_owner(g, owner, n);
    std::vector<double> region_cost(n);
    for (Agent i = 0; i < n; ++i)
        region_cost[i] = detail::centroid_scaled(g, current[i]).cost;
    auto total_cost = [&] {
        double s = 0.0;
        for (double c : region_cost)
            s += c;
        return s * unit;
    };
    double cost = total_cost();
    result.trajectory.push_back({0, cost, false, 0, 0});
    if (n == 1) {
        result.converged_at = 0;
        result.final_partition = std::move(current);
        return result;
    }

    // T_ij depends only on (p_i, p_j) for the deterministic rules, so a pair
    // known to be a fixed point stays one until region i or j changes.
    const bool memoize = algorithm.kind == Algorithm::lloyd_gossip ||
                         (algorithm.kind == Algorithm::pairwise && !algorithm.options.random_tie_choice);
    std::vector<char> known_fixed(n * n, 0);
    std::vector<char> certified(n * n, 0);
    std::size_t uncertified = adj.edges().size();

    PairScheduler scheduler(n, schedule);
    Rng step_rng(mix_seed(schedule.seed));

    for (std::size_t t = 1; t <= max_steps; ++t) {
        const auto [i, j] = scheduler.next(adj);
        bool changed = false;
        if (adj.adjacent(i, j)) {
            if (!(memoize && known_fixed[i * n + j])) {
                detail::PairOutcome o;
                switch (algorithm.kind) {
                case Algorithm::lloyd_gossip:
                    o = detail::lloyd_pair(g, current[i], current[j]);
                    break;
                case Algorithm::pairwise:
                    o = detail::pairwise_pair(g, current[i], current[j], algorithm.options, 0,
                                              algorithm.options.random_tie_choice ? &step_rng : nullptr);
                    break;
                case Algorithm::pairwise_sampled:
                    o = detail::pairwise_pair(g, current[i], current[j], algorithm.options, algorithm.samples,
                                              &step_rng);
                    break;
                case Algorithm::centralized:
                    break;
                }
                if (o.changed) {
                    changed = true;
                    for (Vertex v : o.region_i)
                        owner[v] = static_cast<std::uint32_t>(i);
                    for (Vertex v : o.region_j)
                        owner[v] = static_cast<std::uint32_t>(j);
                    region_cost[i] = o.centroid_i.cost;
                    region_cost[j] = o.centroid_j.cost;
                    current = current.with_pair(i, std::move(o.region_i), j, std::move(o.region_j));
                    adj = detail::adjacency_from_owner(g, owner, n);
                    for (Agent k = 0; k < n; ++k)
                        known_fixed[i * n + k] = known_fixed[k * n + i] = known_fixed[j * n + k] =
                            known_fixed[k * n + j] = 0;
                    // The pairwise rule is idempotent: the union is unchanged,
                    // so a repeat finds the same split and rejects it.
                    if (algorithm.kind == Algorithm::pairwise)
                        known_fixed[i * n + j] = memoize;
                    std::fill(certified.begin(), certified.end(), 0);
                    uncertified = adj.edges().size();
                    cost = total_cost();
                    ++result.exchanges;
                } else {
                    known_fixed[i * n + j] = 1;
                }
            }
            if (!changed && !certified[i * n + j]) {
                certified[i * n + j] = 1;
                --uncertified;
            }
        }
        result.trajectory.push_back({t, cost, changed, i, j});
        if (observer)
            observer({t, i, j, changed, current, cost});
        if (uncertified == 0) {
            result.converged_at = t;
            break;
        }
    }
    result.final_partition = std::move(current);
    return result;
}

/// One trial of a batch; `result` is empty and `error` set if the trial threw.
struct BatchTrial {
    std::size_t condition = 0;
    /// Global trial index (condition * trials_per_condition + k).
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::optional<TrialResult> result;
    std::string error;
};

/// Worker count for batch(): GOSSIP_COVERAGE_THREADS if set to a positive
/// integer, otherwise the hardware concurrency.
inline std::size_t default_thread_count() {
    if (const char* env = std::getenv("GOSSIP_COVERAGE_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs trials_per_condition trials from every initial condition. Trial k
/// (global index) uses schedule seed base_seed + k. Results are ordered by
/// index and do not depend on the thread count.
inline std::vector<BatchTrial> batch(const WeightedGraph& g, std::span<const Partition> initial_conditions,
                                     const AlgorithmConfig& algorithm, const Schedule& schedule,
                                     std::size_t trials_per_condition, std::uint64_t base_seed,
                                     std::size_t max_steps = kDefaultMaxSteps, std::size_t threads = 0) {
    for (const Partition& p : initial_conditions)
        require_valid(g, p);
    std::vector<BatchTrial> trials(initial_conditions.size() * trials_per_condition);
    for (std::size_t k = 0; k < trials.size(); ++k) {
        trials[k].condition = k / trials_per_condition;
        trials[k].trial = k;
        trials[k].seed = base_seed + k;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < trials.size(); k = next++) {
            BatchTrial& bt = trials[k];
            try {
                Schedule s = schedule;
                s.seed = bt.seed;
                bt.result = run(g, initial_conditions[bt.condition], algorithm, s, max_steps);
            } catch (const std::exception& e) {
                bt.error = e.what();
            }
        }
    };
    if (threads == 0)
        threads = default_thread_count();
    threads = std::min(threads, trials.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < threads; ++w)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    return trials;
}

/// Cost formatting shared by every CSV: 9 significant digits.
inline std::string format_cost(double cost) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", cost);
    return buf;
}

inline void write_trajectory_csv(std::ostream& out, std::span<const BatchTrial> trials) {
    out << "trial,seed,step,cost,changed,pair_i,pair_j\n";
    for (const BatchTrial& bt : trials) {
        if (!bt.result)
            continue;
        for (const StepRecord& r : bt.result->trajectory) {
            const bool has_pair = r.step > 0 && !(r.i == 0 && r.j == 0);
            out << bt.trial << ',' << bt.seed << ',' << r.step << ',' << format_cost(r.cost) << ','
                << (r.changed ? 1 : 0) << ',';
            if (has_pair)
                out << (r.i + 1) << ',' << (r.j + 1);
            else
                out << ',';
            out << '\n';
        }
    }
}

inline void write_summary_csv(std::ostream& out, std::span<const BatchTrial> trials) {
    out << "trial,seed,final_cost,converged_at,exchanges\n";
    for (const BatchTrial& bt : trials) {
        out << bt.trial << ',' << bt.seed << ',';
        if (bt.result) {
            out << format_cost(bt.result->final_cost()) << ',';
            if (bt.result->converged_at)
                out << *bt.result->converged_at;
            out << ',' << bt.result->exchanges;
        } else {
            out << ",,";
        }
        out << '\n';
    }
}

} // namespace gossip_coverage
