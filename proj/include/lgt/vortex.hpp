#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "lgt/gauge.hpp"
#include "lgt/lattice.hpp"

namespace lgt {

struct AdjacencyGraph {
    PlaquetteSet nodes;
    std::vector<std::vector<std::size_t>> adj;  // positions into nodes
};

AdjacencyGraph adjacency_graph(const CellComplex& cx, const PlaquetteSet& P);

struct VortexDecomposition {
    std::vector<PlaquetteSet> parts;  // ordered by smallest plaquette
};

VortexDecomposition vortex_decompose(const CellComplex& cx, const PlaquetteSet& P);
bool is_vortex(const CellComplex& cx, const PlaquetteSet& P);

// No shared plaquette and no pair of plaquettes in a common 3-cell.
bool compatible(const CellComplex& cx, const PlaquetteSet& P1, const PlaquetteSet& P2);

// V together with every plaquette sharing a 3-cell with it: a vortex U is
// incompatible with V exactly when it meets this set.
PlaquetteSet incompatibility_closure(const CellComplex& cx, const PlaquetteSet& V);
// U lies in N(V1, ..., Vk): incompatible with at least one Vi.
bool in_neighborhood(const CellComplex& cx, const std::vector<PlaquetteSet>& Vs, const PlaquetteSet& U);

// Edge e with V = P(e), if any.
std::optional<std::size_t> minimal_vortex_edge(const CellComplex& cx, const PlaquetteSet& V);

// Number of vortices of size m containing the anchor. Optionally collects them (sorted).
std::uint64_t enumerate_vortices(const CellComplex& cx, int m, std::size_t anchor,
                                 std::vector<PlaquetteSet>* out = nullptr, int cap = 5);
// Vortices of size m incompatible with V.
std::uint64_t count_vortices_in_neighborhood(const CellComplex& cx, const PlaquetteSet& V, int m, int cap = 5);
// Edges e' (bulk or truncated) with P(e') incompatible with P(e); includes e itself.
std::size_t count_incompatible_minimal_vortices(const CellComplex& cx, std::size_t e);

// Axis-aligned box of vertices, lo <= x <= hi coordinatewise.
struct Rectangle {
    Vertex lo{0, 0, 0, 0};
    Vertex hi{0, 0, 0, 0};

    static Rectangle of(const CubeRegion& c);
    bool operator==(const Rectangle&) const = default;
};

bool in_s2(const CellComplex& cx, const Rectangle& B, std::size_t p);
// Plaquettes on the boundary of B but not on the boundary of the region.
bool in_boundary_s2(const CellComplex& cx, const Rectangle& B, std::size_t p);

// Minimal-side cube holding P off its inner boundary shell; ties go to the least corner.
CubeRegion enclosing_cube(const CellComplex& cx, const PlaquetteSet& P);

bool well_separated(const CellComplex& cx, const PlaquetteSet& P1, const PlaquetteSet& P2, const Rectangle& B);
// First cube by (side, corner) with side below the region side that separates P1 from P2.
std::optional<CubeRegion> find_separating_cube(const CellComplex& cx, const PlaquetteSet& P1,
                                               const PlaquetteSet& P2);

int j_predicate(const CellComplex& cx, const PlaquetteSet& P, const PlaquetteSet& Q);

struct HierarchyLevel {
    std::vector<PlaquetteSet> vertices;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
};
// Levels until the vertex set stops changing; the last level has no edges.
std::vector<HierarchyLevel> hierarchy(const CellComplex& cx, const PlaquetteSet& P);
std::vector<HierarchyLevel> hierarchy_of_parts(const CellComplex& cx, std::vector<PlaquetteSet> parts);

struct KnotDecomposition {
    std::vector<PlaquetteSet> minimal;
    std::vector<std::size_t> minimal_edges;
    std::vector<PlaquetteSet> knots;
};
KnotDecomposition knot_decompose(const CellComplex& cx, const PlaquetteSet& P);

// Loop edges whose minimal vortex is a whole part of the vortex decomposition of P.
std::size_t count_ngamma(const CellComplex& cx, const PlaquetteSet& P, const Loop& loop);

// Precomputed N_gamma test: P(e) counts iff P(e) lies in the support and no other
// support plaquette shares a 3-cell with it.
class NGammaCounter {
public:
    NGammaCounter(const CellComplex& cx, const Loop& loop);

    template <class InSupport>
    std::size_t count(InSupport&& in_supp) const {
        std::size_t n = 0;
        for (const auto& t : tests_) {
            bool ok = true;
            for (std::size_t p : t.vortex)
                if (!in_supp(p)) { ok = false; break; }
            if (!ok) continue;
            for (std::size_t p : t.ring)
                if (in_supp(p)) { ok = false; break; }
            if (ok) ++n;
        }
        return n;
    }
    std::size_t count(const PlaquetteSet& P) const;
    std::size_t length() const { return tests_.size(); }

private:
    struct Test {
        std::vector<std::size_t> vortex;
        std::vector<std::size_t> ring;
    };
    std::vector<Test> tests_;
    std::size_t np_;
};

nlohmann::json to_json(const VortexDecomposition& d);
nlohmann::json to_json(const KnotDecomposition& d);

}  // namespace lgt
