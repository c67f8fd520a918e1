#include <catch_amalgamated.hpp>

#include <map>
#include <random>
#include <set>
#include <sstream>

#include <gossip_coverage/engine.hpp>

#include "oracle.hpp"

using namespace gossip_coverage;

namespace {

const AlgorithmConfig kPairwise{Algorithm::pairwise, 10, {}};
const AlgorithmConfig kLloyd{Algorithm::lloyd_gossip, 10, {}};
const AlgorithmConfig kSampled{Algorithm::pairwise_sampled, 10, {}};
const AlgorithmConfig kCentral{Algorithm::centralized, 10, {}};

Schedule random_schedule(std::uint64_t seed) { return {ScheduleKind::uniform_random, PairDomain::all_pairs, seed}; }

} // namespace

TEST_CASE("algorithm names round trip", "[engine]") {
    for (Algorithm a : {Algorithm::lloyd_gossip, Algorithm::pairwise, Algorithm::pairwise_sampled,
                        Algorithm::centralized})
        CHECK(parse_algorithm(algorithm_name(a)) == a);
    CHECK_FALSE(parse_algorithm("kmeans").has_value());
}

TEST_CASE("round-robin visits every pair once per period", "[engine]") {
    const WeightedGraph g = oracle::path(5).graph();
    const Partition p({{0}, {1}, {2}, {3, 4}});
    const AdjacencyGraph adj = adjacency(g, p);
    PairScheduler s(4, Schedule{});
    REQUIRE(s.period() == 6);
    for (int window = 0; window < 3; ++window) {
        std::set<std::pair<Agent, Agent>> seen;
        for (std::size_t k = 0; k < s.period(); ++k)
            seen.insert(s.next(adj));
        CHECK(seen.size() == 6);
    }

    PairScheduler adjacent_only(4, Schedule{ScheduleKind::round_robin, PairDomain::adjacent_pairs, 0});
    for (int k = 0; k < 9; ++k) {
        const auto [i, j] = adjacent_only.next(adj);
        CHECK(adj.adjacent(i, j));
    }
}

TEST_CASE("uniform-random scheduling covers every pair", "[engine]") {
    const WeightedGraph g = oracle::path(5).graph();
    const Partition p({{0}, {1}, {2}, {3, 4}});
    const AdjacencyGraph adj = adjacency(g, p);
    PairScheduler s(4, random_schedule(3));
    std::map<std::pair<Agent, Agent>, int> counts;
    for (int k = 0; k < 6000; ++k)
        ++counts[s.next(adj)];
    REQUIRE(counts.size() == 6);
    for (const auto& [pair, c] : counts)
        CHECK(c == Catch::Approx(1000).margin(150));
}

TEST_CASE("run on the five-vertex path", "[engine]") {
    const WeightedGraph g = oracle::path(5).graph();
    const Partition p0({{0, 1, 2, 3}, {4}});

    const TrialResult pw = run(g, p0, kPairwise, Schedule{});
    REQUIRE(pw.converged_at.has_value());
    CHECK(pw.final_cost() == 3.0);
    CHECK(pw.final_partition == Partition({{0, 1}, {2, 3, 4}}));
    CHECK(pw.exchanges == 1);
    CHECK(pw.trajectory.front().cost == 4.0);
    CHECK(pw.trajectory.front().step == 0);

    const TrialResult lg = run(g, p0, kLloyd, Schedule{});
    REQUIRE(lg.converged_at.has_value());
    CHECK(lg.final_cost() == 3.0);
    CHECK(lg.final_partition == Partition({{0, 1, 2}, {3, 4}}));

    const auto oracle_best = oracle::best_two_partition_cost(oracle::path(5));
    CHECK(pw.final_cost() == oracle_best);
}

TEST_CASE("an optimal start converges without exchanges", "[engine]") {
    const WeightedGraph g = oracle::path(6).graph();
    const Partition p0({{0, 1}, {2, 3}, {4, 5}});
    const TrialResult t = run(g, p0, kPairwise, Schedule{});
    REQUIRE(t.converged_at.has_value());
    CHECK(t.exchanges == 0);
    // Pairs come in order (0,1), (0,2), (1,2); the non-adjacent one still counts.
    CHECK(*t.converged_at == 3);
    CHECK(t.final_partition == p0);

    const TrialResult single = run(g, Partition({{0, 1, 2, 3, 4, 5}}), kPairwise, Schedule{});
    CHECK(single.converged_at == std::optional<std::size_t>(0));
    CHECK(single.trajectory.size() == 1);
}

TEST_CASE("run reports exhaustion and rejects bad input", "[engine]") {
    const WeightedGraph g = oracle::path(8).graph();
    const Partition p0({{0}, {1, 2, 3, 4, 5, 6, 7}});
    const TrialResult t = run(g, p0, kLloyd, Schedule{}, 1);
    CHECK_FALSE(t.converged_at.has_value());
    CHECK(t.trajectory.size() == 2);

    CHECK_THROWS_AS(run(g, p0, kPairwise, Schedule{}, 0), precondition_error);
    CHECK_THROWS_AS(run(g, Partition({{0, 2}, {1, 3, 4, 5, 6, 7}}), kPairwise, Schedule{}), precondition_error);
    AlgorithmConfig zero = kSampled;
    zero.samples = 0;
    CHECK_THROWS_AS(run(g, p0, zero, Schedule{}), precondition_error);
}

TEST_CASE("trajectories are nonincreasing and end at fixed points", "[engine][property]") {
    std::mt19937_64 gen(201);
    for (int round = 0; round < 40; ++round) {
        const auto inst = round % 2 ? oracle::random_holey_grid(6, 6, 0.2, gen)
                                    : oracle::random_connected(12 + round % 8, 5, gen, round % 4 == 0);
        const WeightedGraph g = inst.graph();
        const std::size_t n = 2 + static_cast<std::size_t>(round) % 4;
        const Partition p0 = random_partition(g, n, static_cast<std::uint64_t>(round));
        for (const AlgorithmConfig& algo : {kPairwise, kLloyd, kSampled}) {
            const Schedule schedule = round % 3 ? Schedule{} : random_schedule(static_cast<std::uint64_t>(round));
            const TrialResult t = run(g, p0, algo, schedule, 20000, [&](const StepEvent& e) {
                CHECK(validate(g, e.partition).ok());
            });
            REQUIRE(t.converged_at.has_value());
            CHECK(t.trajectory.size() == *t.converged_at + 1);
            std::size_t changes = 0;
            for (std::size_t k = 1; k < t.trajectory.size(); ++k) {
                const StepRecord& r = t.trajectory[k];
                CHECK(r.step == k);
                if (r.changed) {
                    ++changes;
                    CHECK(r.cost < t.trajectory[k - 1].cost);
                } else {
                    CHECK(r.cost == t.trajectory[k - 1].cost);
                }
            }
            CHECK(changes == t.exchanges);
            CHECK(t.final_cost() == Catch::Approx(hexp(g, t.final_partition)).margin(1e-9));
            if (algo.kind == Algorithm::pairwise)
                CHECK(is_pairwise_optimal(g, t.final_partition));
            if (algo.kind != Algorithm::pairwise_sampled)
                CHECK(centroidal_voronoi_in_pairs(g, t.final_partition));
        }
    }
}

TEST_CASE("centralized runs in the engine", "[engine]") {
    const WeightedGraph g = oracle::path(6).graph();
    const TrialResult t = run(g, Partition({{0}, {1, 2, 3, 4, 5}}), kCentral, Schedule{});
    REQUIRE(t.converged_at.has_value());
    CHECK(t.final_cost() == 5.0);
    CHECK(t.final_partition == Partition({{0, 1}, {2, 3, 4, 5}}));
}

TEST_CASE("random tie choice runs converge", "[engine]") {
    const WeightedGraph g = oracle::grid(5, 5).graph();
    AlgorithmConfig algo = kPairwise;
    algo.options.random_tie_choice = true;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const TrialResult t = run(g, random_partition(g, 3, seed), algo, random_schedule(seed), 20000);
        REQUIRE(t.converged_at.has_value());
        CHECK(is_pairwise_optimal(g, t.final_partition));
    }
}

TEST_CASE("batch", "[engine]") {
    const auto inst = oracle::grid(4, 5, {7});
    const WeightedGraph g = inst.graph();
    const std::vector<Partition> starts{random_partition(g, 2, 1), random_partition(g, 2, 2)};

    SECTION("one trial reproduces run") {
        const auto b = batch(g, std::span(starts).first(1), kSampled, random_schedule(0), 1, 77);
        REQUIRE(b.size() == 1);
        REQUIRE(b[0].result.has_value());
        const TrialResult direct = run(g, starts[0], kSampled, random_schedule(77));
        CHECK(b[0].seed == 77);
        CHECK(b[0].result->final_partition == direct.final_partition);
        CHECK(b[0].result->trajectory.size() == direct.trajectory.size());
        CHECK(b[0].result->final_cost() == direct.final_cost());
    }
    SECTION("deterministic and independent of the thread count") {
        const auto one = batch(g, starts, kSampled, random_schedule(0), 5, 100, 5000, 1);
        const auto many = batch(g, starts, kSampled, random_schedule(0), 5, 100, 5000, 3);
        std::ostringstream a, b;
        write_trajectory_csv(a, one);
        write_trajectory_csv(b, many);
        CHECK(a.str() == b.str());
        REQUIRE(one.size() == 10);
        CHECK(one[7].condition == 1);
        CHECK(one[7].seed == 107);
    }
    SECTION("two agents never beat the brute-force optimum") {
        const double best = oracle::best_two_partition_cost(oracle::grid(3, 3, {4}));
        const WeightedGraph ring = oracle::grid(3, 3, {4}).graph();
        const std::vector<Partition> start{random_partition(ring, 2, 5)};
        for (const auto& bt : batch(ring, start, kLloyd, random_schedule(0), 20, 0)) {
            REQUIRE(bt.result.has_value());
            CHECK(bt.result->final_cost() >= best);
        }
    }
    SECTION("invalid initial condition") {
        const std::vector<Partition> bad{Partition(std::vector<Region>{Region{0}})};
        CHECK_THROWS_AS(batch(g, bad, kPairwise, Schedule{}, 1, 0), precondition_error);
    }
}

TEST_CASE("csv output", "[engine]") {
    const WeightedGraph g = oracle::path(5).graph();
    const std::vector<Partition> start{Partition({{0, 1, 2, 3}, {4}})};
    const auto trials = batch(g, start, kPairwise, Schedule{}, 1, 9);
    std::ostringstream traj, summary;
    write_trajectory_csv(traj, trials);
    write_summary_csv(summary, trials);
    CHECK(traj.str() == "trial,seed,step,cost,changed,pair_i,pair_j\n"
                        "0,9,0,4,0,,\n"
                        "0,9,1,3,1,1,2\n"
                        "0,9,2,3,0,1,2\n");
    CHECK(summary.str() == "trial,seed,final_cost,converged_at,exchanges\n"
                           "0,9,3,2,1\n");
    CHECK(format_cost(624.123456789) == "624.123457");
    CHECK(format_cost(0.1 * 3) == "0.3");
}
