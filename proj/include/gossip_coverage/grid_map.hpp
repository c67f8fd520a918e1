#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "graph.hpp"

namespace gossip_coverage {

enum class Connectivity { four = 4, eight = 8 };

/// Occupancy grid. Free cells become graph vertices in row-major order.
struct GridMap {
    std::size_t width = 0;
    std::size_t height = 0;
    double resolution = 1.0;
    Connectivity connectivity = Connectivity::four;
    std::vector<std::uint8_t> blocked; // row-major, 1 = blocked

    static constexpr std::uint32_t kNoVertex = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> vertex_of_cell; // kNoVertex for blocked cells
    std::vector<std::size_t> cell_of_vertex;

    std::size_t free_cells() const { return cell_of_vertex.size(); }
    std::size_t row(Vertex v) const { return cell_of_vertex[v] / width; }
    std::size_t col(Vertex v) const { return cell_of_vertex[v] % width; }
};

struct LoadedMap {
    GridMap grid;
    WeightedGraph graph;
};

struct MapOptions {
    double resolution = 1.0;
    Connectivity connectivity = Connectivity::four;
    /// PGM pixels below this (on a 0..255 scale) are blocked.
    int pgm_threshold = 128;
};

namespace detail {

inline std::string cell_name(std::size_t r, std::size_t c) {
    return "(row " + std::to_string(r) + ", col " + std::to_string(c) + ")";
}

/// Numbers free cells, rejects disconnected free space, and builds the graph.
inline LoadedMap build_map(GridMap grid, std::vector<double> phi) {
    if (!(grid.resolution > 0.0) || !std::isfinite(grid.resolution))
        throw input_error("resolution must be positive");
    grid.vertex_of_cell.assign(grid.width * grid.height, GridMap::kNoVertex);
    grid.cell_of_vertex.clear();
    for (std::size_t cell = 0; cell < grid.blocked.size(); ++cell)
        if (!grid.blocked[cell]) {
            grid.vertex_of_cell[cell] = static_cast<std::uint32_t>(grid.cell_of_vertex.size());
            grid.cell_of_vertex.push_back(cell);
        }
    if (grid.cell_of_vertex.empty())
        throw input_error("map has no free cells");

    const bool diagonal = grid.connectivity == Connectivity::eight;
    const double straight = grid.resolution;
    const double slanted = grid.resolution * std::sqrt(2.0);
    std::vector<Edge> edges;
    for (std::size_t r = 0; r < grid.height; ++r)
        for (std::size_t c = 0; c < grid.width; ++c) {
            const std::uint32_t v = grid.vertex_of_cell[r * grid.width + c];
            if (v == GridMap::kNoVertex)
                continue;
            auto link = [&](std::size_t r2, std::size_t c2, double w) {
                const std::uint32_t u = grid.vertex_of_cell[r2 * grid.width + c2];
                if (u != GridMap::kNoVertex)
                    edges.push_back({v, u, w});
            };
            if (c + 1 < grid.width)
                link(r, c + 1, straight);
            if (r + 1 < grid.height) {
                link(r + 1, c, straight);
                if (diagonal && c + 1 < grid.width)
                    link(r + 1, c + 1, slanted);
                if (diagonal && c > 0)
                    link(r + 1, c - 1, slanted);
            }
        }

    // Connectivity check here so the error can name grid cells.
    const std::size_t n = grid.cell_of_vertex.size();
    std::vector<std::vector<std::uint32_t>> nb(n);
    for (const Edge& e : edges) {
        nb[e.u].push_back(e.v);
        nb[e.v].push_back(e.u);
    }
    std::vector<char> seen(n, 0);
    std::vector<std::uint32_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
        const std::uint32_t v = stack.back();
        stack.pop_back();
        for (std::uint32_t w : nb[v])
            if (!seen[w]) {
                seen[w] = 1;
                stack.push_back(w);
            }
    }
    for (std::uint32_t v = 0; v < n; ++v)
        if (!seen[v])
            throw input_error("free space is disconnected: cells " +
                              cell_name(grid.row(0), grid.col(0)) + " and " + cell_name(grid.row(v), grid.col(v)) +
                              " are not connected");

    if (!phi.empty() && phi.size() != n)
        throw input_error("weight map has " + std::to_string(phi.size()) + " entries, expected " +
                          std::to_string(n));
    WeightedGraph graph(n, edges, std::move(phi));
    return LoadedMap{std::move(grid), std::move(graph)};
}

inline std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    return line;
}

/// Reads the next whitespace-separated PGM header token, skipping comments.
inline std::string pgm_token(std::istream& in) {
    std::string token;
    char ch = 0;
    while (in.get(ch)) {
        if (ch == '#') {
            std::string rest;
            std::getline(in, rest);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!token.empty())
                break;
            continue;
        }
        token.push_back(ch);
    }
    return token;
}

inline long pgm_number(std::istream& in, const char* what) {
    const std::string t = pgm_token(in);
    try {
        std::size_t used = 0;
        const long v = std::stol(t, &used);
        if (used != t.size() || v <= 0)
            throw input_error("");
        return v;
    } catch (const std::exception&) {
        throw input_error(std::string("bad PGM ") + what);
    }
}

} // namespace detail

/// ASCII map: '#' blocked, '.' free, one text line per grid row.
inline GridMap parse_ascii_grid(const std::string& text) {
    GridMap grid;
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(in, line)) {
        line = detail::strip_cr(line);
        if (line.empty())
            continue;
        rows.push_back(line);
    }
    if (rows.empty())
        throw input_error("empty map");
    grid.width = rows.front().size();
    grid.height = rows.size();
    grid.blocked.reserve(grid.width * grid.height);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != grid.width)
            throw input_error("map row " + std::to_string(r) + " has length " + std::to_string(rows[r].size()) +
                              ", expected " + std::to_string(grid.width));
        for (char ch : rows[r]) {
            if (ch != '#' && ch != '.')
                throw input_error(std::string("unexpected map character '") + ch + "' in row " + std::to_string(r));
            grid.blocked.push_back(ch == '#' ? 1 : 0);
        }
    }
    return grid;
}

/// Binary (P5) or plain (P2) PGM; pixels below `threshold` (0..255 scale) are blocked.
inline GridMap parse_pgm_grid(const std::string& bytes, int threshold) {
    std::istringstream in(bytes);
    const std::string magic = detail::pgm_token(in);
    if (magic != "P2" && magic != "P5")
        throw input_error("not a PGM file");
    GridMap grid;
    grid.width = static_cast<std::size_t>(detail::pgm_number(in, "width"));
    grid.height = static_cast<std::size_t>(detail::pgm_number(in, "height"));
    const long maxval = detail::pgm_number(in, "maxval");
    if (maxval > 65535)
        throw input_error("bad PGM maxval");
    const std::size_t cells = grid.width * grid.height;
    grid.blocked.reserve(cells);
    auto classify = [&](long pixel) {
        if (pixel < 0 || pixel > maxval)
            throw input_error("PGM pixel out of range");
        grid.blocked.push_back(pixel * 255 < static_cast<long>(threshold) * maxval ? 1 : 0);
    };
    if (magic == "P2") {
        for (std::size_t k = 0; k < cells; ++k) {
            long pixel = 0;
            if (!(in >> pixel))
                throw input_error("PGM ends early");
            classify(pixel);
        }
    } else {
        // pgm_token consumed exactly one whitespace byte after maxval.
        const std::size_t bytes_per_pixel = maxval > 255 ? 2 : 1;
        std::string raw(cells * bytes_per_pixel, '\0');
        if (!in.read(raw.data(), static_cast<std::streamsize>(raw.size())))
            throw input_error("PGM ends early");
        for (std::size_t k = 0; k < cells; ++k) {
            long pixel = static_cast<unsigned char>(raw[k * bytes_per_pixel]);
            if (bytes_per_pixel == 2)
                pixel = pixel * 256 + static_cast<unsigned char>(raw[k * 2 + 1]);
            classify(pixel);
        }
    }
    return grid;
}

/// Parses map text of either format (detected from the content).
inline GridMap parse_grid(const std::string& content, const MapOptions& options = {}) {
    GridMap grid;
    if (content.rfind("P2", 0) == 0 || content.rfind("P5", 0) == 0) {
        grid = parse_pgm_grid(content, options.pgm_threshold);
    } else if (content.find_first_not_of("#.\r\n") == std::string::npos) {
        grid = parse_ascii_grid(content);
    } else {
        throw input_error("unknown map format (expected ASCII '#'/'.' grid or PGM)");
    }
    grid.resolution = options.resolution;
    grid.connectivity = options.connectivity;
    return grid;
}

/// Vertex weights: either one value per free cell in vertex order, or one
/// value per grid cell in row-major order (blocked cells ignored).
inline std::vector<double> parse_phi(const std::string& text, const GridMap& grid) {
    std::istringstream in(text);
    std::vector<double> values;
    std::string token;
    while (in >> token) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(token, &used));
            if (used != token.size())
                throw input_error("");
        } catch (const std::exception&) {
            throw input_error("bad weight value '" + token + "'");
        }
    }
    for (double w : values)
        if (!(w > 0.0) || !std::isfinite(w))
            throw input_error("weights must be positive and finite");
    if (values.size() == grid.width * grid.height && values.size() != grid.free_cells()) {
        std::vector<double> per_vertex;
        per_vertex.reserve(grid.free_cells());
        for (std::size_t cell : grid.cell_of_vertex)
            per_vertex.push_back(values[cell]);
        return per_vertex;
    }
    if (values.size() != grid.free_cells())
        throw input_error("weight file has " + std::to_string(values.size()) + " values; expected " +
                          std::to_string(grid.free_cells()) + " (free cells) or " +
                          std::to_string(grid.width * grid.height) + " (grid cells)");
    return values;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw input_error("cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Map text to grid + graph; uniform vertex weights unless `phi_text` is given.
inline LoadedMap load_map_from_string(const std::string& content, const MapOptions& options = {},
                                      const std::optional<std::string>& phi_text = std::nullopt) {
    GridMap grid = parse_grid(content, options);
    // Number the cells first so per-grid weight files can be mapped.
    LoadedMap plain = detail::build_map(std::move(grid), {});
    if (!phi_text)
        return plain;
    std::vector<double> phi = parse_phi(*phi_text, plain.grid);
    return detail::build_map(std::move(plain.grid), std::move(phi));
}

inline LoadedMap load_map(const std::string& path, const MapOptions& options = {},
                          const std::optional<std::string>& phi_path = std::nullopt) {
    std::optional<std::string> phi_text;
    if (phi_path)
        phi_text = read_file(*phi_path);
    return load_map_from_string(read_file(path), options, phi_text);
}

} // namespace gossip_coverage
