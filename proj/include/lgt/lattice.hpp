#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <json.hpp>

#include "lgt/error.hpp"

namespace lgt {

using Vertex = std::array<int, 4>;

struct CubeRegion {
    Vertex corner{0, 0, 0, 0};
    int side = 1;

    bool contains(const Vertex& v) const;
    bool is_boundary_vertex(const Vertex& v) const;
    long long vertex_count() const;
};

// Positive cells have sign +1; sign 0 marks the zero cell produced by a repeated direction.
// Directions are stored as a bitmask, bit i-1 for direction i.
struct OrientedCell {
    Vertex base{0, 0, 0, 0};
    std::uint8_t dirs = 0;
    int sign = 1;

    int degree() const;
    bool is_zero() const { return sign == 0; }
    OrientedCell operator-() const { return {base, dirs, -sign}; }
    std::vector<int> directions() const;
    bool operator==(const OrientedCell&) const = default;
};

OrientedCell canonicalize(const Vertex& x, const std::vector<int>& dirs);
std::vector<OrientedCell> positive_cells(const CubeRegion& region, int k);
int incidence(const OrientedCell& cprime, const OrientedCell& c);
std::vector<Vertex> cell_vertices(const OrientedCell& c);

enum class CellPosition { Interior, OnBoundary, Outside };
CellPosition classify(const OrientedCell& c, const CubeRegion& region);

struct Incidence {
    std::size_t index;
    int sign;
};

struct PlaquetteEdge {
    std::size_t edge;
    int orientation;
};

using IncidenceMatrix = Eigen::SparseMatrix<std::int64_t, Eigen::RowMajor>;

// Dense indexing of all positive cells of a cubic region plus the incidence operators.
class CellComplex {
public:
    explicit CellComplex(const CubeRegion& region);

    const CubeRegion& region() const { return region_; }
    int side() const { return region_.side; }
    std::size_t count(int k) const { return counts_[k]; }

    std::optional<std::size_t> find(const Vertex& base, std::uint8_t dirs) const;
    std::size_t index(const OrientedCell& c) const;
    OrientedCell cell(int k, std::size_t i) const;

    std::size_t vertex_index(const Vertex& v) const;
    Vertex vertex(std::size_t i) const { return cell(0, i).base; }

    // Rows are (k+1)-cells, columns k-cells, entry I(c', c) for c' a face of c.
    const IncidenceMatrix& boundary(int k) const { return boundary_[k]; }
    const IncidenceMatrix& coboundary(int k) const { return coboundary_[k]; }
    std::vector<Incidence> faces(int k, std::size_t i) const;
    std::vector<Incidence> cofaces(int k, std::size_t i) const;

    std::size_t edge_tail(std::size_t e) const { return edge_ends_[2 * e]; }
    std::size_t edge_head(std::size_t e) const { return edge_ends_[2 * e + 1]; }
    int edge_direction(std::size_t e) const { return edge_dir_[e]; }

    // Boundary edges of a plaquette in holonomy order.
    const std::array<PlaquetteEdge, 4>& plaquette_edges(std::size_t p) const { return plaq_edges_[p]; }
    const std::vector<std::size_t>& edge_plaquettes(std::size_t e) const { return edge_plaqs_[e]; }
    // Plaquettes sharing a 3-cell with p, sorted.
    const std::vector<std::size_t>& plaquette_neighbors(std::size_t p) const { return plaq_nbrs_[p]; }

private:
    CubeRegion region_;
    std::array<std::size_t, 5> counts_{};
    std::array<int, 16> slot_of_{};
    std::array<std::size_t, 16> offset_of_{};
    std::array<std::vector<std::uint8_t>, 5> dirsets_;
    std::array<IncidenceMatrix, 4> boundary_;
    std::array<IncidenceMatrix, 4> coboundary_;
    std::vector<std::size_t> edge_ends_;
    std::vector<int> edge_dir_;
    std::vector<std::array<PlaquetteEdge, 4>> plaq_edges_;
    std::vector<std::vector<std::size_t>> edge_plaqs_;
    std::vector<std::vector<std::size_t>> plaq_nbrs_;
};

std::vector<std::size_t> three_cells_containing(const CellComplex& cx, std::size_t edge);
std::vector<std::size_t> plaquettes_containing(const CellComplex& cx, std::size_t edge);
std::vector<std::size_t> minimal_vortex(const CellComplex& cx, std::size_t edge);
// Edge whose every transverse neighbour lies in the region: full 6-plaquette vortex.
bool is_bulk_edge(const CellComplex& cx, std::size_t edge);

struct DirectedEdge {
    std::size_t edge;
    int orientation;
};

class Loop {
public:
    Loop() = default;
    // Steps are +-1..+-4.
    Loop(const Vertex& start, std::vector<int> steps);

    const Vertex& start() const { return start_; }
    const std::vector<int>& steps() const { return steps_; }
    std::size_t length() const { return steps_.size(); }
    bool is_closed() const;
    bool is_self_avoiding() const;
    std::vector<Vertex> vertices() const;
    std::vector<DirectedEdge> edges(const CellComplex& cx) const;

    // Counterclockwise rectangle in the (i, j) plane, directions 1-based.
    static Loop rectangle(int w, int h, int i, int j, const Vertex& corner);

    nlohmann::json to_json() const;
    static Loop from_json(const nlohmann::json& doc);

private:
    Vertex start_{0, 0, 0, 0};
    std::vector<int> steps_;
};

// Self-avoiding closed loop grown from a unit square by plaquette moves.
Loop random_loop(const CubeRegion& region, std::size_t max_length, std::mt19937_64& rng);

}  // namespace lgt
