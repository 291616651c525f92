#include "lgt/vortex.hpp"

#include <algorithm>
#include <numeric>

namespace lgt {

namespace {

bool contains_sorted(const PlaquetteSet& s, std::size_t p) { return std::binary_search(s.begin(), s.end(), p); }

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void join(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// Groups 0..n-1 by union-find root; groups ordered by their smallest member.
std::vector<std::vector<std::size_t>> groups(UnionFind& uf, std::size_t n) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::ptrdiff_t> slot(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = uf.find(i);
        if (slot[r] < 0) {
            slot[r] = static_cast<std::ptrdiff_t>(out.size());
            out.emplace_back();
        }
        out[static_cast<std::size_t>(slot[r])].push_back(i);
    }
    return out;
}

// Redelmeier's algorithm: every connected set of size m containing root and avoiding the
// pre-marked plaquettes is visited exactly once.
template <class Visit>
void redelmeier(const CellComplex& cx, int m, std::size_t root, std::vector<char>& seen, Visit&& visit) {
    std::vector<std::size_t> current;
    auto rec = [&](auto&& self, std::vector<std::size_t> untried) -> void {
        while (!untried.empty()) {
            const std::size_t u = untried.back();
            untried.pop_back();
            current.push_back(u);
            if (static_cast<int>(current.size()) == m) {
                visit(current);
            } else {
                std::vector<std::size_t> next = untried;
                std::vector<std::size_t> added;
                for (std::size_t w : cx.plaquette_neighbors(u)) {
                    if (seen[w]) continue;
                    seen[w] = 1;
                    next.push_back(w);
                    added.push_back(w);
                }
                self(self, std::move(next));
                for (std::size_t w : added) seen[w] = 0;
            }
            current.pop_back();
        }
    };
    seen[root] = 1;
    rec(rec, {root});
    seen[root] = 0;
}

void check_cap(int m, int cap) {
    if (m < 1) throw LgtError(ErrorKind::Precondition, "vortex size must be positive");
    if (m > cap) throw LgtError(ErrorKind::Budget, "vortex size " + std::to_string(m) + " exceeds the enumeration cap");
}

// Transverse coordinate k of plaquette c sits at value v.
bool transverse_at(const OrientedCell& c, int k, int v) { return !(c.dirs >> k & 1) && c.base[k] == v; }

bool on_region_boundary(const CellComplex& cx, const OrientedCell& c) {
    const auto& r = cx.region();
    for (int k = 0; k < 4; ++k)
        if (transverse_at(c, k, r.corner[k]) || transverse_at(c, k, r.corner[k] + r.side)) return true;
    return false;
}

bool inside(const OrientedCell& c, const Rectangle& B) {
    for (int k = 0; k < 4; ++k) {
        const int top = c.base[k] + (c.dirs >> k & 1);
        if (c.base[k] < B.lo[k] || top > B.hi[k]) return false;
    }
    return true;
}

bool on_box_boundary(const OrientedCell& c, const Rectangle& B) {
    for (int k = 0; k < 4; ++k)
        if (transverse_at(c, k, B.lo[k]) || transverse_at(c, k, B.hi[k])) return true;
    return false;
}

}  // namespace

AdjacencyGraph adjacency_graph(const CellComplex& cx, const PlaquetteSet& P) {
    AdjacencyGraph g{P, std::vector<std::vector<std::size_t>>(P.size())};
    for (std::size_t i = 0; i < P.size(); ++i)
        for (std::size_t q : cx.plaquette_neighbors(P[i])) {
            auto it = std::lower_bound(P.begin(), P.end(), q);
            if (it != P.end() && *it == q) g.adj[i].push_back(static_cast<std::size_t>(it - P.begin()));
        }
    return g;
}

VortexDecomposition vortex_decompose(const CellComplex& cx, const PlaquetteSet& P) {
    const auto g = adjacency_graph(cx, P);
    UnionFind uf(P.size());
    for (std::size_t i = 0; i < P.size(); ++i)
        for (std::size_t j : g.adj[i]) uf.join(i, j);
    VortexDecomposition d;
    for (const auto& grp : groups(uf, P.size())) {
        PlaquetteSet part;
        for (std::size_t i : grp) part.push_back(P[i]);
        d.parts.push_back(std::move(part));
    }
    return d;
}

bool is_vortex(const CellComplex& cx, const PlaquetteSet& P) { return vortex_decompose(cx, P).parts.size() == 1; }

bool compatible(const CellComplex& cx, const PlaquetteSet& P1, const PlaquetteSet& P2) {
    for (std::size_t p : P1) {
        if (contains_sorted(P2, p)) return false;
        for (std::size_t q : cx.plaquette_neighbors(p))
            if (contains_sorted(P2, q)) return false;
    }
    return true;
}

PlaquetteSet incompatibility_closure(const CellComplex& cx, const PlaquetteSet& V) {
    PlaquetteSet out = V;
    for (std::size_t p : V) out.insert(out.end(), cx.plaquette_neighbors(p).begin(), cx.plaquette_neighbors(p).end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool in_neighborhood(const CellComplex& cx, const std::vector<PlaquetteSet>& Vs, const PlaquetteSet& U) {
    return std::any_of(Vs.begin(), Vs.end(), [&](const PlaquetteSet& V) { return !compatible(cx, V, U); });
}

std::optional<std::size_t> minimal_vortex_edge(const CellComplex& cx, const PlaquetteSet& V) {
    if (V.empty()) return std::nullopt;
    for (const auto& pe : cx.plaquette_edges(V.front()))
        if (minimal_vortex(cx, pe.edge) == V) return pe.edge;
    return std::nullopt;
}

std::uint64_t enumerate_vortices(const CellComplex& cx, int m, std::size_t anchor, std::vector<PlaquetteSet>* out,
                                 int cap) {
    check_cap(m, cap);
    std::vector<char> seen(cx.count(2), 0);
    std::uint64_t n = 0;
    redelmeier(cx, m, anchor, seen, [&](const std::vector<std::size_t>& cur) {
        ++n;
        if (out) {
            PlaquetteSet s = cur;
            std::sort(s.begin(), s.end());
            out->push_back(std::move(s));
        }
    });
    if (out) std::sort(out->begin(), out->end());
    return n;
}

std::uint64_t count_vortices_in_neighborhood(const CellComplex& cx, const PlaquetteSet& V, int m, int cap) {
    check_cap(m, cap);
    const PlaquetteSet closure = incompatibility_closure(cx, V);
    std::vector<char> seen(cx.count(2), 0);
    std::uint64_t n = 0;
    // Each vortex is counted at its smallest closure plaquette: smaller ones are excluded.
    for (std::size_t a : closure) {
        redelmeier(cx, m, a, seen, [&](const std::vector<std::size_t>&) { ++n; });
        seen[a] = 1;
    }
    return n;
}

std::size_t count_incompatible_minimal_vortices(const CellComplex& cx, std::size_t e) {
    const PlaquetteSet V = minimal_vortex(cx, e);
    std::size_t n = 0;
    for (std::size_t f = 0; f < cx.count(1); ++f)
        if (!compatible(cx, V, minimal_vortex(cx, f))) ++n;
    return n;
}

Rectangle Rectangle::of(const CubeRegion& c) {
    Rectangle r{c.corner, c.corner};
    for (int& h : r.hi) h += c.side;
    return r;
}

bool in_s2(const CellComplex& cx, const Rectangle& B, std::size_t p) { return inside(cx.cell(2, p), B); }

bool in_boundary_s2(const CellComplex& cx, const Rectangle& B, std::size_t p) {
    const auto c = cx.cell(2, p);
    return inside(c, B) && on_box_boundary(c, B) && !on_region_boundary(cx, c);
}

CubeRegion enclosing_cube(const CellComplex& cx, const PlaquetteSet& P) {
    if (P.empty()) throw LgtError(ErrorKind::Precondition, "enclosing_cube needs a nonempty set");
    const auto& reg = cx.region();
    Vertex lo, hi;
    lo.fill(std::numeric_limits<int>::max());
    hi.fill(std::numeric_limits<int>::min());
    std::vector<OrientedCell> cells;
    for (std::size_t p : P) {
        const auto c = cx.cell(2, p);
        cells.push_back(c);
        for (int k = 0; k < 4; ++k) {
            lo[k] = std::min(lo[k], c.base[k]);
            hi[k] = std::max(hi[k], c.base[k] + (c.dirs >> k & 1));
        }
    }
    int extent = 1;
    for (int k = 0; k < 4; ++k) extent = std::max(extent, hi[k] - lo[k]);
    for (int s = extent; s <= reg.side; ++s) {
        Vertex from, to;
        for (int k = 0; k < 4; ++k) {
            from[k] = std::max(reg.corner[k], hi[k] - s);
            to[k] = std::min(lo[k], reg.corner[k] + reg.side - s);
        }
        Vertex c = from;
        auto scan = [&](auto&& self, int k) -> std::optional<CubeRegion> {
            if (k == 4) {
                const CubeRegion cube{c, s};
                const Rectangle B = Rectangle::of(cube);
                for (const auto& cell : cells)
                    if (on_box_boundary(cell, B) && !on_region_boundary(cx, cell)) return std::nullopt;
                return cube;
            }
            for (c[k] = from[k]; c[k] <= to[k]; ++c[k])
                if (auto r = self(self, k + 1)) return r;
            return std::nullopt;
        };
        if (auto r = scan(scan, 0)) return *r;
    }
    throw std::logic_error("enclosing_cube: the region itself should qualify");
}

bool well_separated(const CellComplex& cx, const PlaquetteSet& P1, const PlaquetteSet& P2, const Rectangle& B) {
    for (std::size_t p : P1)
        if (!in_s2(cx, B, p) || in_boundary_s2(cx, B, p)) return false;
    for (std::size_t p : P2)
        if (in_s2(cx, B, p)) return false;
    return true;
}

std::optional<CubeRegion> find_separating_cube(const CellComplex& cx, const PlaquetteSet& P1,
                                               const PlaquetteSet& P2) {
    const auto& reg = cx.region();
    for (int s = 1; s < reg.side; ++s) {
        Vertex c;
        auto scan = [&](auto&& self, int k) -> std::optional<CubeRegion> {
            if (k == 4) {
                const CubeRegion cube{c, s};
                if (well_separated(cx, P1, P2, Rectangle::of(cube))) return cube;
                return std::nullopt;
            }
            for (c[k] = reg.corner[k]; c[k] <= reg.corner[k] + reg.side - s; ++c[k])
                if (auto r = self(self, k + 1)) return r;
            return std::nullopt;
        };
        if (auto r = scan(scan, 0)) return r;
    }
    return std::nullopt;
}

namespace {

bool meets(const CellComplex& cx, const PlaquetteSet& P, const Rectangle& B) {
    return std::any_of(P.begin(), P.end(), [&](std::size_t p) { return in_s2(cx, B, p); });
}

}  // namespace

int j_predicate(const CellComplex& cx, const PlaquetteSet& P, const PlaquetteSet& Q) {
    if (P.empty() || Q.empty()) return 0;
    return meets(cx, P, Rectangle::of(enclosing_cube(cx, Q))) || meets(cx, Q, Rectangle::of(enclosing_cube(cx, P)))
               ? 1
               : 0;
}

std::vector<HierarchyLevel> hierarchy_of_parts(const CellComplex& cx, std::vector<PlaquetteSet> parts) {
    std::sort(parts.begin(), parts.end());
    std::vector<HierarchyLevel> levels;
    while (true) {
        HierarchyLevel level{std::move(parts), {}};
        const std::size_t n = level.vertices.size();
        std::vector<Rectangle> boxes;
        for (const auto& v : level.vertices) boxes.push_back(Rectangle::of(enclosing_cube(cx, v)));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (meets(cx, level.vertices[i], boxes[j]) || meets(cx, level.vertices[j], boxes[i]))
                    level.edges.emplace_back(i, j);
        levels.push_back(level);
        if (level.edges.empty()) break;
        UnionFind uf(n);
        for (auto [i, j] : level.edges) uf.join(i, j);
        parts.clear();
        for (const auto& grp : groups(uf, n)) {
            PlaquetteSet u;
            for (std::size_t i : grp) u.insert(u.end(), level.vertices[i].begin(), level.vertices[i].end());
            std::sort(u.begin(), u.end());
            parts.push_back(std::move(u));
        }
        std::sort(parts.begin(), parts.end());
    }
    return levels;
}

std::vector<HierarchyLevel> hierarchy(const CellComplex& cx, const PlaquetteSet& P) {
    return hierarchy_of_parts(cx, vortex_decompose(cx, P).parts);
}

KnotDecomposition knot_decompose(const CellComplex& cx, const PlaquetteSet& P) {
    KnotDecomposition out;
    std::vector<PlaquetteSet> rest;
    for (auto& part : vortex_decompose(cx, P).parts) {
        if (auto e = minimal_vortex_edge(cx, part)) {
            out.minimal.push_back(std::move(part));
            out.minimal_edges.push_back(*e);
        } else {
            rest.push_back(std::move(part));
        }
    }
    if (!rest.empty()) out.knots = hierarchy_of_parts(cx, std::move(rest)).back().vertices;
    return out;
}

std::size_t count_ngamma(const CellComplex& cx, const PlaquetteSet& P, const Loop& loop) {
    const auto parts = vortex_decompose(cx, P).parts;
    std::size_t n = 0;
    for (const auto& de : loop.edges(cx))
        if (std::find(parts.begin(), parts.end(), minimal_vortex(cx, de.edge)) != parts.end()) ++n;
    return n;
}

NGammaCounter::NGammaCounter(const CellComplex& cx, const Loop& loop) : np_(cx.count(2)) {
    for (const auto& de : loop.edges(cx)) {
        Test t;
        t.vortex = minimal_vortex(cx, de.edge);
        for (std::size_t p : incompatibility_closure(cx, t.vortex))
            if (!contains_sorted(t.vortex, p)) t.ring.push_back(p);
        tests_.push_back(std::move(t));
    }
}

std::size_t NGammaCounter::count(const PlaquetteSet& P) const {
    std::vector<char> mark(np_, 0);
    for (std::size_t p : P) mark[p] = 1;
    return count([&](std::size_t p) { return mark[p] != 0; });
}

nlohmann::json to_json(const VortexDecomposition& d) { return {{"vortices", d.parts}}; }

nlohmann::json to_json(const KnotDecomposition& d) {
    return {{"minimal", d.minimal}, {"minimal_edges", d.minimal_edges}, {"knots", d.knots}};
}

}  // namespace lgt
