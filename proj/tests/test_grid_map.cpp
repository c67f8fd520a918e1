#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include <gossip_coverage/cost.hpp>
#include <gossip_coverage/grid_map.hpp>

using namespace gossip_coverage;

namespace {

std::string data_file(const std::string& name) { return std::string(GC_DATA_DIR) + "/" + name; }

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("a one-row ASCII map is a path", "[grid_map]") {
    const LoadedMap m = load_map_from_string("....\n");
    CHECK(m.graph.size() == 4);
    CHECK(m.graph.uniform_weights());
    for (Vertex v = 0; v < 4; ++v)
        CHECK(m.graph.neighbors(v).size() == (v == 0 || v == 3 ? 1u : 2u));
    CHECK(m.graph.edge_weight(0, 1) == 1.0);
    CHECK(shortest_paths(m.graph, 0)[3] == 3.0);
}

TEST_CASE("a ring of free cells around a blocked centre is an 8-cycle", "[grid_map]") {
    const LoadedMap m = load_map_from_string("...\n.#.\n...\n");
    REQUIRE(m.graph.size() == 8);
    for (Vertex v = 0; v < 8; ++v)
        CHECK(m.graph.neighbors(v).size() == 2);
    // Opposite corners are four steps apart around the ring.
    CHECK(shortest_paths(m.graph, 0)[7] == 4.0);
    CHECK(m.grid.row(3) == 1);
    CHECK(m.grid.col(3) == 0);
    CHECK(m.grid.col(4) == 2);
}

TEST_CASE("resolution scales edge lengths", "[grid_map]") {
    MapOptions options;
    options.resolution = 0.1;
    const LoadedMap m = load_map_from_string("...\n...\n", options);
    CHECK(m.graph.uniform_weights());
    CHECK(m.graph.length_unit() == 0.1);
    CHECK(shortest_paths(m.graph, 0)[5] == 3.0 * 0.1);
}

TEST_CASE("8-connectivity adds diagonals of length sqrt 2", "[grid_map]") {
    MapOptions options;
    options.connectivity = Connectivity::eight;
    const LoadedMap m = load_map_from_string("..\n..\n", options);
    CHECK(m.graph.neighbors(0).size() == 3);
    CHECK(m.graph.edge_weight(0, 3) == Catch::Approx(std::sqrt(2.0)));
    CHECK(shortest_paths(m.graph, 0)[3] == Catch::Approx(std::sqrt(2.0)));
    // Diagonal steps only need both end cells free.
    const LoadedMap corner = load_map_from_string(".#\n#.\n", options);
    CHECK(corner.graph.size() == 2);
}

TEST_CASE("disconnected free space is rejected with cell names", "[grid_map]") {
    const std::string msg = message_of([] { load_map(data_file("two_rooms.txt")); });
    CHECK(msg.find("disconnected") != std::string::npos);
    CHECK(msg.find("(row 1, col 1)") != std::string::npos);
    CHECK(msg.find("(row 1, col 5)") != std::string::npos);
    CHECK_THROWS_AS(load_map_from_string(".#.\n"), input_error);
}

TEST_CASE("malformed maps are rejected", "[grid_map]") {
    CHECK_THROWS_AS(load_map_from_string("..x.\n"), input_error);
    CHECK_THROWS_AS(load_map_from_string("...\n..\n"), input_error);
    CHECK_THROWS_AS(load_map_from_string("###\n"), input_error);
    CHECK_THROWS_AS(load_map_from_string(""), input_error);
    CHECK_THROWS_AS(load_map(data_file("missing.txt")), input_error);
    MapOptions bad;
    bad.resolution = 0.0;
    CHECK_THROWS_AS(load_map_from_string("..\n", bad), input_error);
}

TEST_CASE("PGM maps", "[grid_map]") {
    SECTION("plain") {
        const LoadedMap m = load_map_from_string("P2\n# comment\n3 2\n255\n255 255 0\n127 200 255\n");
        CHECK(m.grid.width == 3);
        CHECK(m.grid.height == 2);
        // 0 and 127 are blocked.
        CHECK(m.graph.size() == 4);
        CHECK(m.grid.free_cells() == 4);
    }
    SECTION("binary matches plain") {
        std::string bin = "P5\n3 2\n255\n";
        for (int px : {255, 255, 0, 127, 200, 255})
            bin.push_back(static_cast<char>(px));
        const LoadedMap b = load_map_from_string(bin);
        const LoadedMap p = load_map_from_string("P2\n3 2\n255\n255 255 0\n127 200 255\n");
        CHECK(b.grid.blocked == p.grid.blocked);
    }
    SECTION("sixteen-bit samples are scaled") {
        std::string bin = "P5 2 1 65535\n";
        for (int px : {65535, 1000}) {
            bin.push_back(static_cast<char>(px >> 8));
            bin.push_back(static_cast<char>(px & 0xff));
        }
        const GridMap g = parse_grid(bin);
        CHECK(g.blocked == std::vector<std::uint8_t>{0, 1});
    }
    SECTION("threshold is configurable") {
        MapOptions options;
        options.pgm_threshold = 100;
        const LoadedMap m = load_map_from_string("P2 2 1 255 120 255\n", options);
        CHECK(m.graph.size() == 2);
    }
    SECTION("truncated") {
        CHECK_THROWS_AS(load_map_from_string("P2\n3 2\n255\n255 0\n"), input_error);
        CHECK_THROWS_AS(load_map_from_string("P6\n1 1\n255\n0\n"), input_error);
    }
}

TEST_CASE("vertex weights from a companion file", "[grid_map]") {
    const std::string map = "...\n.#.\n";
    const LoadedMap per_vertex = load_map_from_string(map, {}, std::string("1 2 3\n4 5\n"));
    CHECK(per_vertex.graph.phi(4) == 5.0);
    const LoadedMap per_cell = load_map_from_string(map, {}, std::string("1 2 3\n4 0.5 6\n"));
    CHECK(per_cell.graph.phi(3) == 4.0);
    CHECK(per_cell.graph.phi(4) == 6.0);
    CHECK_THROWS_AS(load_map_from_string(map, {}, std::string("1 2 3\n")), input_error);
    CHECK_THROWS_AS(load_map_from_string(map, {}, std::string("1 2 3 4 -5\n")), input_error);
    CHECK_THROWS_AS(load_map_from_string(map, {}, std::string("1 2 3 4 five\n")), input_error);
}

TEST_CASE("shipped maps", "[grid_map]") {
    const LoadedMap cave = load_map(data_file("cave.txt"));
    CHECK(cave.graph.size() == 919);
    CHECK(cave.graph.exact_arithmetic());
    const LoadedMap again = load_map(data_file("cave.txt"));
    CHECK(again.grid.cell_of_vertex == cave.grid.cell_of_vertex);

    const LoadedMap corridor = load_map(data_file("corridor.txt"));
    CHECK(corridor.graph.size() == 10);
}
