#pragma once

#include <array>
#include <iosfwd>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lgt/group.hpp"
#include "lgt/lattice.hpp"

namespace lgt {

// One group element per positive edge; the reversed edge carries the inverse.
using EdgeConfig = std::vector<Elem>;
// One group element per vertex.
using GaugeTransform = std::vector<Elem>;
// Sorted plaquette indices.
using PlaquetteSet = std::vector<std::size_t>;

struct SpanningTree {
    std::size_t root = 0;
    std::vector<char> in_tree;               // per edge
    std::vector<std::ptrdiff_t> parent_edge;  // per vertex, -1 at the root
    std::vector<std::size_t> order;           // vertices, parents before children
};

// BFS from root; neighbours are tried in the given step priority.
SpanningTree bfs_tree(const CellComplex& cx, const Vertex& root,
                      const std::array<int, 8>& priority = {1, 2, 3, 4, -1, -2, -3, -4});
SpanningTree random_tree(const CellComplex& cx, const Vertex& root, std::mt19937_64& rng);
bool is_spanning_tree(const CellComplex& cx, const SpanningTree& tree);

EdgeConfig identity_config(const CellComplex& cx);

Elem plaquette_holonomy(const CellComplex& cx, const GroupTable& g, const EdgeConfig& sigma, std::size_t p,
                        int start_corner = 0, bool reversed = false);
double action(const CellComplex& cx, const UnitaryRep& rep, const EdgeConfig& sigma);
double boltzmann_weight(const CellComplex& cx, const UnitaryRep& rep, const EdgeConfig& sigma, double beta);

Elem loop_holonomy(const CellComplex& cx, const GroupTable& g, const EdgeConfig& sigma, const Loop& loop);
Complex wilson_loop(const CellComplex& cx, const UnitaryRep& rep, const EdgeConfig& sigma, const Loop& loop);

// sigma'_(x,y) = h_x sigma_(x,y) h_y^-1.
EdgeConfig gauge_transform(const CellComplex& cx, const GroupTable& g, const EdgeConfig& sigma,
                           const GaugeTransform& h);

// Representative in GF(T) and the transform h (h at the root = 1) that produces it.
std::pair<EdgeConfig, GaugeTransform> gauge_fix(const CellComplex& cx, const GroupTable& g,
                                                const EdgeConfig& sigma, const SpanningTree& tree);

PlaquetteSet support(const CellComplex& cx, const GroupTable& g, const EdgeConfig& sigma);

// Little-endian snapshot: magic, region, group id, one uint16 element per positive edge.
void write_snapshot(std::ostream& out, const CellComplex& cx, const std::string& group_id, const EdgeConfig& sigma);
struct Snapshot {
    CubeRegion region;
    std::string group_id;
    EdgeConfig sigma;
};
Snapshot read_snapshot(std::istream& in);

}  // namespace lgt
