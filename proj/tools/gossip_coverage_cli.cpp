// gossip-coverage: partition an occupancy-grid map among agents with gossip
// coverage algorithms and write cost trajectories as CSV.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <gossip_coverage/gossip_coverage.hpp>

namespace gc = gossip_coverage;
namespace fs = std::filesystem;

namespace {

struct MapArgs {
    std::string path;
    double resolution = 1.0;
    int connectivity = 4;
    int pgm_threshold = 128;
    std::string phi;
};

struct RunArgs {
    std::size_t agents = 0;
    std::string algo = "pairwise";
    std::size_t samples = 10;
    std::string schedule = "roundrobin";
    std::string pairs = "all";
    std::uint64_t seed = 0;
    std::size_t trials = 1;
    std::size_t max_steps = gc::kDefaultMaxSteps;
    std::string init = "random";
    std::string out = ".";
    bool unweighted_pair_cost = false;
    bool random_ties = false;
};

void add_map_options(CLI::App* cmd, MapArgs& m) {
    cmd->add_option("--map", m.path, "ASCII ('#' blocked, '.' free) or PGM occupancy grid")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--resolution", m.resolution, "Cell size in meters")->check(CLI::PositiveNumber);
    cmd->add_option("--connectivity", m.connectivity, "4 or 8 neighbours")->check(CLI::IsMember({4, 8}));
    cmd->add_option("--pgm-threshold", m.pgm_threshold, "PGM pixels below this (0-255) are blocked")
        ->check(CLI::Range(0, 256));
    cmd->add_option("--phi", m.phi, "Vertex weights, one per free cell or per grid cell")->check(CLI::ExistingFile);
}

void add_run_options(CLI::App* cmd, RunArgs& r) {
    cmd->add_option("--agents", r.agents, "Number of agents");
    cmd->add_option("--samples", r.samples, "Candidate pairs per update for pairwise-sampled")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--schedule", r.schedule, "Pair schedule")->check(CLI::IsMember({"roundrobin", "random"}));
    cmd->add_option("--pairs", r.pairs, "Schedule over all agent pairs or only adjacent ones")
        ->check(CLI::IsMember({"all", "adjacent"}));
    cmd->add_option("--seed", r.seed, "Base seed");
    cmd->add_option("--trials", r.trials, "Trials per initial condition")->check(CLI::PositiveNumber);
    cmd->add_option("--max-steps", r.max_steps, "Step limit per trial")->check(CLI::PositiveNumber);
    cmd->add_option("--out", r.out, "Output directory");
    cmd->add_flag("--unweighted-pair-cost", r.unweighted_pair_cost, "Ignore vertex weights when ranking pairs");
    cmd->add_flag("--random-ties", r.random_ties, "Pick a random minimizing pair instead of the first");
}

gc::LoadedMap load(const MapArgs& m) {
    gc::MapOptions options;
    options.resolution = m.resolution;
    options.connectivity = m.connectivity == 8 ? gc::Connectivity::eight : gc::Connectivity::four;
    options.pgm_threshold = m.pgm_threshold;
    return gc::load_map(m.path, options, m.phi.empty() ? std::nullopt : std::optional<std::string>(m.phi));
}

gc::AlgorithmConfig algorithm_config(const std::string& name, const RunArgs& r) {
    const auto kind = gc::parse_algorithm(name);
    if (!kind)
        throw gc::input_error("unknown algorithm '" + name + "'");
    gc::AlgorithmConfig config;
    config.kind = *kind;
    config.samples = r.samples;
    config.options.weighted_pair_cost = !r.unweighted_pair_cost;
    config.options.random_tie_choice = r.random_ties;
    return config;
}

gc::Schedule schedule_of(const RunArgs& r) {
    gc::Schedule s;
    s.kind = r.schedule == "random" ? gc::ScheduleKind::uniform_random : gc::ScheduleKind::round_robin;
    s.domain = r.pairs == "adjacent" ? gc::PairDomain::adjacent_pairs : gc::PairDomain::all_pairs;
    s.seed = r.seed;
    return s;
}

void require_agents(const gc::WeightedGraph& g, std::size_t agents) {
    if (agents < 1)
        throw gc::input_error("--agents must be at least 1");
    if (agents > g.size())
        throw gc::input_error("--agents " + std::to_string(agents) + " exceeds the " + std::to_string(g.size()) +
                              " free cells");
}

gc::Partition initial_partition(const gc::WeightedGraph& g, const RunArgs& r) {
    if (r.init == "random") {
        require_agents(g, r.agents);
        return gc::random_partition(g, r.agents, r.seed);
    }
    if (r.init.rfind("file:", 0) != 0)
        throw gc::input_error("--init must be 'random' or 'file:<path>'");
    const std::string path = r.init.substr(5);
    std::ifstream in(path);
    if (!in)
        throw gc::input_error("cannot open " + path);
    gc::Partition p = gc::read_partition(in);
    if (r.agents != 0 && r.agents != p.size())
        throw gc::input_error("partition file has " + std::to_string(p.size()) + " regions but --agents is " +
                              std::to_string(r.agents));
    const auto report = gc::validate(g, p);
    if (!report.ok())
        throw gc::input_error("initial partition is invalid: " + gc::describe(report.violations.front()));
    return p;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw gc::input_error("cannot write " + path.string());
    return out;
}

void write_partition_file(const fs::path& path, const gc::Partition& p) {
    auto out = open_output(path);
    gc::write_partition(out, p);
}

std::string converged_text(const std::optional<std::size_t>& at) {
    return at ? std::to_string(*at) : std::string("none");
}

int cmd_run(const MapArgs& m, RunArgs r) {
    const gc::LoadedMap map = load(m);
    const gc::WeightedGraph& g = map.graph;
    const gc::AlgorithmConfig algo = algorithm_config(r.algo, r);
    if (algo.kind == gc::Algorithm::centralized && r.trials != 1) {
        std::cerr << "note: lloyd-central is deterministic; running a single trial\n";
        r.trials = 1;
    }
    const gc::Partition p0 = initial_partition(g, r);
    const std::vector<gc::Partition> starts{p0};

    const auto trials = gc::batch(g, starts, algo, schedule_of(r), r.trials, r.seed, r.max_steps);

    const fs::path out_dir(r.out);
    fs::create_directories(out_dir);
    {
        auto out = open_output(out_dir / "trajectory.csv");
        gc::write_trajectory_csv(out, trials);
    }
    {
        auto out = open_output(out_dir / "summary.csv");
        gc::write_summary_csv(out, trials);
    }
    write_partition_file(out_dir / "initial_partition.txt", p0);

    std::cout << "map " << m.path << ": " << g.size() << " free cells, " << p0.size() << " agents, algorithm "
              << gc::algorithm_name(algo.kind) << "\n";
    std::cout << "initial cost " << gc::format_cost(gc::hexp(g, p0)) << "\n";
    int status = 0;
    std::vector<double> finals;
    for (const gc::BatchTrial& bt : trials) {
        if (!bt.result) {
            std::cerr << "trial " << bt.trial << " failed: " << bt.error << "\n";
            status = 1;
            continue;
        }
        write_partition_file(out_dir / ("final_partition_" + std::to_string(bt.trial) + ".txt"),
                             bt.result->final_partition);
        finals.push_back(bt.result->final_cost());
        std::cout << "trial " << bt.trial << " seed " << bt.seed << ": final cost "
                  << gc::format_cost(bt.result->final_cost()) << ", converged at "
                  << converged_text(bt.result->converged_at) << ", " << bt.result->exchanges << " exchanges\n";
    }
    if (finals.size() > 1) {
        std::sort(finals.begin(), finals.end());
        std::cout << "final cost min " << gc::format_cost(finals.front()) << " median "
                  << gc::format_cost(finals[finals.size() / 2]) << " max " << gc::format_cost(finals.back()) << "\n";
    }
    return status;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> items;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty())
            items.push_back(item);
    return items;
}

int cmd_compare(const MapArgs& m, const RunArgs& r, std::size_t conditions, const std::string& algos) {
    const gc::LoadedMap map = load(m);
    const gc::WeightedGraph& g = map.graph;
    require_agents(g, r.agents);
    if (conditions < 1)
        throw gc::input_error("--conditions must be at least 1");

    std::vector<gc::AlgorithmConfig> gossip;
    for (const std::string& name : split_list(algos)) {
        gc::AlgorithmConfig a = algorithm_config(name, r);
        if (a.kind == gc::Algorithm::centralized)
            throw gc::input_error("lloyd-central is always run as the baseline");
        gossip.push_back(a);
    }
    if (gossip.empty())
        throw gc::input_error("--algos lists no algorithm");

    std::vector<gc::Partition> starts;
    for (std::size_t c = 0; c < conditions; ++c)
        starts.push_back(gc::random_partition(g, r.agents, r.seed + c));

    const fs::path out_dir(r.out);
    fs::create_directories(out_dir);
    auto out = open_output(out_dir / "compare.csv");
    out << "condition,algo,trial,final_cost\n";

    int status = 0;
    const gc::AlgorithmConfig central{gc::Algorithm::centralized, r.samples, {}};
    std::vector<double> baseline(conditions);
    for (std::size_t c = 0; c < conditions; ++c) {
        const gc::TrialResult t = gc::run(g, starts[c], central, gc::Schedule{}, r.max_steps);
        baseline[c] = t.final_cost();
        out << c << ',' << gc::algorithm_name(central.kind) << ",0," << gc::format_cost(baseline[c]) << '\n';
    }

    std::map<std::string, std::vector<double>> per_algo;
    for (const gc::AlgorithmConfig& a : gossip) {
        const auto trials = gc::batch(g, starts, a, schedule_of(r), r.trials, r.seed, r.max_steps);
        const std::string name(gc::algorithm_name(a.kind));
        for (const gc::BatchTrial& bt : trials) {
            if (!bt.result) {
                std::cerr << name << " trial " << bt.trial << " failed: " << bt.error << "\n";
                status = 1;
                continue;
            }
            out << bt.condition << ',' << name << ',' << bt.trial % r.trials << ','
                << gc::format_cost(bt.result->final_cost()) << '\n';
            per_algo[name].push_back(bt.result->final_cost());
        }
    }

    std::cout << "map " << m.path << ": " << g.size() << " free cells, " << r.agents << " agents, " << conditions
              << " initial conditions x " << r.trials << " trials\n";
    std::cout << "lloyd-central mean " << gc::format_cost(std::accumulate(baseline.begin(), baseline.end(), 0.0) /
                                                          static_cast<double>(conditions))
              << "\n";
    for (auto& [name, costs] : per_algo) {
        std::sort(costs.begin(), costs.end());
        std::cout << name << " min " << gc::format_cost(costs.front()) << " median "
                  << gc::format_cost(costs[costs.size() / 2]) << " max " << gc::format_cost(costs.back()) << "\n";
    }
    return status;
}

int cmd_validate(const MapArgs& m) {
    const gc::LoadedMap map = load(m);
    std::size_t edges = 0;
    for (gc::Vertex v = 0; v < map.graph.size(); ++v)
        edges += map.graph.neighbors(v).size();
    std::cout << m.path << ": " << map.grid.width << "x" << map.grid.height << " cells, " << map.graph.size()
              << " free, " << edges / 2 << " edges, connected\n";
    return 0;
}

int cmd_brute_force(const MapArgs& m, std::size_t agents, std::size_t cap, const std::string& out_path) {
    const gc::LoadedMap map = load(m);
    const gc::KMedianOptimum best = gc::brute_force_optimum(map.graph, agents, cap);
    std::cout << "optimal cost " << gc::format_cost(best.cost) << "\ncenters";
    for (gc::Vertex c : best.centers)
        std::cout << ' ' << c + 1 << " (row " << map.grid.row(c) << ", col " << map.grid.col(c) << ")";
    std::cout << "\n";
    if (!out_path.empty())
        write_partition_file(out_path, best.partition);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coverage partitioning of grid maps by gossiping agents"};
    app.require_subcommand(1);

    MapArgs map_args;
    RunArgs run_args;

    auto* run = app.add_subcommand("run", "Run trials from one initial partition");
    add_map_options(run, map_args);
    add_run_options(run, run_args);
    run->add_option("--algo", run_args.algo, "Update rule")
        ->check(CLI::IsMember({"lloyd-gossip", "pairwise", "pairwise-sampled", "lloyd-central"}));
    run->add_option("--init", run_args.init, "'random' or 'file:<path>'");

    std::size_t conditions = 10;
    std::string algos = "lloyd-gossip,pairwise";
    auto* compare = app.add_subcommand("compare", "Compare algorithms over random initial conditions");
    add_map_options(compare, map_args);
    add_run_options(compare, run_args);
    compare->add_option("--conditions", conditions, "Number of random initial conditions");
    compare->add_option("--algos", algos, "Comma-separated gossip algorithms");

    auto* validate = app.add_subcommand("validate-map", "Check that a map loads and its free space is connected");
    add_map_options(validate, map_args);

    std::size_t bf_agents = 2;
    std::size_t cap = 200;
    std::string bf_out;
    auto* brute = app.add_subcommand("brute-force", "Exact optimum for up to 3 agents on small maps");
    add_map_options(brute, map_args);
    brute->add_option("--agents", bf_agents, "Number of agents (1 to 3)");
    brute->add_option("--cap", cap, "Largest number of free cells accepted");
    brute->add_option("--out", bf_out, "Write the optimal partition to this file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run)
            return cmd_run(map_args, run_args);
        if (*compare) {
            if (compare->count("--trials") == 0)
                run_args.trials = 20;
            return cmd_compare(map_args, run_args, conditions, algos);
        }
        if (*validate)
            return cmd_validate(map_args);
        if (*brute)
            return cmd_brute_force(map_args, bf_agents, cap, bf_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
