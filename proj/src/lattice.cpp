#include "lgt/lattice.hpp"

#include <algorithm>
#include <bit>
#include <set>

namespace lgt {

namespace {

std::uint8_t bit(int dir0) { return static_cast<std::uint8_t>(1u << dir0); }

Vertex shifted(Vertex v, int dir0, int by) {
    v[dir0] += by;
    return v;
}

// Faces of the positive cell (x, D): (x, D \ i_j) with sign (-1)^j and
// (x + e_{i_j}, D \ i_j) with sign (-1)^{j+1}, j counted from 1.
template <class F>
void for_each_face(const Vertex& x, std::uint8_t dirs, F&& f) {
    int j = 0;
    for (int d = 0; d < 4; ++d) {
        if (!(dirs & bit(d))) continue;
        ++j;
        const std::uint8_t rest = dirs & static_cast<std::uint8_t>(~bit(d));
        const int s = (j % 2 == 0) ? 1 : -1;
        f(x, rest, s);
        f(shifted(x, d, 1), rest, -s);
    }
}

}  // namespace

bool CubeRegion::contains(const Vertex& v) const {
    for (int i = 0; i < 4; ++i)
        if (v[i] < corner[i] || v[i] > corner[i] + side) return false;
    return true;
}

bool CubeRegion::is_boundary_vertex(const Vertex& v) const {
    if (!contains(v)) return false;
    for (int i = 0; i < 4; ++i)
        if (v[i] == corner[i] || v[i] == corner[i] + side) return true;
    return false;
}

long long CubeRegion::vertex_count() const {
    const long long m = side + 1;
    return m * m * m * m;
}

int OrientedCell::degree() const { return std::popcount(static_cast<unsigned>(dirs)); }

std::vector<int> OrientedCell::directions() const {
    std::vector<int> out;
    for (int d = 0; d < 4; ++d)
        if (dirs & bit(d)) out.push_back(d + 1);
    return out;
}

OrientedCell canonicalize(const Vertex& x, const std::vector<int>& dirs) {
    OrientedCell c{x, 0, 1};
    for (int d : dirs) {
        if (d < 1 || d > 4) throw LgtError(ErrorKind::InvalidPair, "direction out of range 1..4");
        if (c.dirs & bit(d - 1)) return {x, 0, 0};
        c.dirs |= bit(d - 1);
    }
    int inversions = 0;
    for (std::size_t a = 0; a < dirs.size(); ++a)
        for (std::size_t b = a + 1; b < dirs.size(); ++b)
            if (dirs[a] > dirs[b]) ++inversions;
    c.sign = inversions % 2 ? -1 : 1;
    return c;
}

std::vector<Vertex> cell_vertices(const OrientedCell& c) {
    std::vector<Vertex> out{c.base};
    for (int d = 0; d < 4; ++d) {
        if (!(c.dirs & bit(d))) continue;
        const std::size_t n = out.size();
        for (std::size_t i = 0; i < n; ++i) out.push_back(shifted(out[i], d, 1));
    }
    return out;
}

CellPosition classify(const OrientedCell& c, const CubeRegion& region) {
    bool all_boundary = true;
    for (const auto& v : cell_vertices(c)) {
        if (!region.contains(v)) return CellPosition::Outside;
        if (!region.is_boundary_vertex(v)) all_boundary = false;
    }
    return all_boundary ? CellPosition::OnBoundary : CellPosition::Interior;
}

int incidence(const OrientedCell& cprime, const OrientedCell& c) {
    if (cprime.degree() + 1 != c.degree())
        throw LgtError(ErrorKind::InvalidPair, "incidence needs dim(c') = dim(c) - 1");
    if (cprime.is_zero() || c.is_zero()) return 0;
    int found = 0;
    for_each_face(c.base, c.dirs, [&](const Vertex& y, std::uint8_t dirs, int s) {
        if (y == cprime.base && dirs == cprime.dirs) found = s;
    });
    return found * cprime.sign * c.sign;
}

std::vector<OrientedCell> positive_cells(const CubeRegion& region, int k) {
    if (k < 0 || k > 4) throw LgtError(ErrorKind::Degree, "cell degree must be in 0..4");
    CellComplex cx(region);
    std::vector<OrientedCell> out;
    out.reserve(cx.count(k));
    for (std::size_t i = 0; i < cx.count(k); ++i) out.push_back(cx.cell(k, i));
    return out;
}

CellComplex::CellComplex(const CubeRegion& region) : region_(region) {
    if (region.side < 1) throw LgtError(ErrorKind::Precondition, "region side must be >= 1");
    const std::size_t n = static_cast<std::size_t>(region.side);
    slot_of_.fill(-1);
    for (int k = 0; k <= 4; ++k) {
        // Lexicographic order of sorted direction tuples.
        std::vector<std::vector<int>> combos;
        std::vector<int> pick(k);
        auto rec = [&](auto&& self, int start, int depth) -> void {
            if (depth == k) {
                combos.push_back(pick);
                return;
            }
            for (int d = start; d < 4; ++d) {
                pick[depth] = d;
                self(self, d + 1, depth + 1);
            }
        };
        rec(rec, 0, 0);
        std::size_t off = 0;
        for (const auto& cmb : combos) {
            std::uint8_t mask = 0;
            for (int d : cmb) mask |= bit(d);
            slot_of_[mask] = static_cast<int>(dirsets_[k].size());
            offset_of_[mask] = off;
            dirsets_[k].push_back(mask);
            std::size_t block = 1;
            for (int d = 0; d < 4; ++d) block *= (mask & bit(d)) ? n : n + 1;
            off += block;
        }
        counts_[k] = off;
    }

    for (int k = 0; k < 4; ++k) {
        std::vector<Eigen::Triplet<std::int64_t>> trips;
        trips.reserve(counts_[k + 1] * 2 * (k + 1));
        for (std::size_t i = 0; i < counts_[k + 1]; ++i) {
            const OrientedCell c = cell(k + 1, i);
            for_each_face(c.base, c.dirs, [&](const Vertex& y, std::uint8_t dirs, int s) {
                trips.emplace_back(static_cast<int>(i), static_cast<int>(*find(y, dirs)), s);
            });
        }
        boundary_[k].resize(static_cast<Eigen::Index>(counts_[k + 1]), static_cast<Eigen::Index>(counts_[k]));
        boundary_[k].setFromTriplets(trips.begin(), trips.end());
        coboundary_[k] = boundary_[k].transpose();
    }

    const std::size_t ne = counts_[1];
    edge_ends_.resize(2 * ne);
    edge_dir_.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const OrientedCell c = cell(1, e);
        const int d = std::countr_zero(static_cast<unsigned>(c.dirs));
        edge_dir_[e] = d;
        edge_ends_[2 * e] = vertex_index(c.base);
        edge_ends_[2 * e + 1] = vertex_index(shifted(c.base, d, 1));
    }

    const std::size_t np = counts_[2];
    plaq_edges_.resize(np);
    for (std::size_t p = 0; p < np; ++p) {
        const OrientedCell c = cell(2, p);
        const auto ds = c.directions();
        const int i = ds[0] - 1, j = ds[1] - 1;
        plaq_edges_[p] = {{{*find(c.base, bit(i)), 1},
                           {*find(shifted(c.base, i, 1), bit(j)), 1},
                           {*find(shifted(c.base, j, 1), bit(i)), -1},
                           {*find(c.base, bit(j)), -1}}};
    }

    edge_plaqs_.resize(ne);
    for (std::size_t e = 0; e < ne; ++e)
        for (IncidenceMatrix::InnerIterator it(coboundary_[1], static_cast<Eigen::Index>(e)); it; ++it)
            edge_plaqs_[e].push_back(static_cast<std::size_t>(it.col()));

    plaq_nbrs_.resize(np);
    for (std::size_t p = 0; p < np; ++p) {
        auto& nb = plaq_nbrs_[p];
        for (IncidenceMatrix::InnerIterator it(coboundary_[2], static_cast<Eigen::Index>(p)); it; ++it)
            for (IncidenceMatrix::InnerIterator jt(boundary_[2], it.col()); jt; ++jt)
                if (static_cast<std::size_t>(jt.col()) != p) nb.push_back(static_cast<std::size_t>(jt.col()));
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
}

std::optional<std::size_t> CellComplex::find(const Vertex& base, std::uint8_t dirs) const {
    const int slot = slot_of_[dirs & 15];
    if (slot < 0) return std::nullopt;
    const int n = region_.side;
    std::size_t idx = 0;
    for (int d = 0; d < 4; ++d) {
        const int ext = (dirs & bit(d)) ? n : n + 1;
        const int off = base[d] - region_.corner[d];
        if (off < 0 || off >= ext) return std::nullopt;
        idx = idx * static_cast<std::size_t>(ext) + static_cast<std::size_t>(off);
    }
    return offset_of_[dirs] + idx;
}

std::size_t CellComplex::index(const OrientedCell& c) const {
    auto i = find(c.base, c.dirs);
    if (!i) throw LgtError(ErrorKind::Precondition, "cell is not in the region");
    return *i;
}

OrientedCell CellComplex::cell(int k, std::size_t i) const {
    const auto& sets = dirsets_[k];
    std::size_t s = sets.size() - 1;
    while (offset_of_[sets[s]] > i) --s;
    const std::uint8_t mask = sets[s];
    std::size_t rem = i - offset_of_[mask];
    const int n = region_.side;
    Vertex x{};
    for (int d = 3; d >= 0; --d) {
        const std::size_t ext = (mask & bit(d)) ? n : n + 1;
        x[d] = region_.corner[d] + static_cast<int>(rem % ext);
        rem /= ext;
    }
    return {x, mask, 1};
}

std::size_t CellComplex::vertex_index(const Vertex& v) const {
    auto i = find(v, 0);
    if (!i) throw LgtError(ErrorKind::Precondition, "vertex is not in the region");
    return *i;
}

std::vector<Incidence> CellComplex::faces(int k, std::size_t i) const {
    if (k < 1 || k > 4) throw LgtError(ErrorKind::Degree, "faces need degree 1..4");
    std::vector<Incidence> out;
    for (IncidenceMatrix::InnerIterator it(boundary_[k - 1], static_cast<Eigen::Index>(i)); it; ++it)
        out.push_back({static_cast<std::size_t>(it.col()), static_cast<int>(it.value())});
    return out;
}

std::vector<Incidence> CellComplex::cofaces(int k, std::size_t i) const {
    if (k < 0 || k > 3) throw LgtError(ErrorKind::Degree, "cofaces need degree 0..3");
    std::vector<Incidence> out;
    for (IncidenceMatrix::InnerIterator it(coboundary_[k], static_cast<Eigen::Index>(i)); it; ++it)
        out.push_back({static_cast<std::size_t>(it.col()), static_cast<int>(it.value())});
    return out;
}

std::vector<std::size_t> three_cells_containing(const CellComplex& cx, std::size_t edge) {
    std::vector<std::size_t> out;
    for (std::size_t p : cx.edge_plaquettes(edge))
        for (const auto& c : cx.cofaces(2, p)) out.push_back(c.index);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::size_t> plaquettes_containing(const CellComplex& cx, std::size_t edge) {
    std::vector<std::size_t> out = cx.edge_plaquettes(edge);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> minimal_vortex(const CellComplex& cx, std::size_t edge) {
    return plaquettes_containing(cx, edge);
}

bool is_bulk_edge(const CellComplex& cx, std::size_t edge) { return cx.edge_plaquettes(edge).size() == 6; }

Loop::Loop(const Vertex& start, std::vector<int> steps) : start_(start), steps_(std::move(steps)) {
    for (int s : steps_)
        if (s == 0 || s < -4 || s > 4) throw LgtError(ErrorKind::Precondition, "loop steps must be +-1..+-4");
}

std::vector<Vertex> Loop::vertices() const {
    std::vector<Vertex> out{start_};
    Vertex v = start_;
    for (int s : steps_) {
        v[std::abs(s) - 1] += s > 0 ? 1 : -1;
        out.push_back(v);
    }
    return out;
}

bool Loop::is_closed() const { return vertices().back() == start_; }

bool Loop::is_self_avoiding() const {
    std::set<std::pair<Vertex, int>> seen;
    Vertex v = start_;
    for (int s : steps_) {
        const int d = std::abs(s) - 1;
        Vertex base = v;
        if (s < 0) base[d] -= 1;
        if (!seen.insert({base, d}).second) return false;
        v[d] += s > 0 ? 1 : -1;
    }
    return true;
}

std::vector<DirectedEdge> Loop::edges(const CellComplex& cx) const {
    std::vector<DirectedEdge> out;
    out.reserve(steps_.size());
    Vertex v = start_;
    for (int s : steps_) {
        const int d = std::abs(s) - 1;
        Vertex base = v;
        if (s < 0) base[d] -= 1;
        auto e = cx.find(base, bit(d));
        if (!e) throw LgtError(ErrorKind::Precondition, "loop leaves the region");
        out.push_back({*e, s > 0 ? 1 : -1});
        v[d] += s > 0 ? 1 : -1;
    }
    return out;
}

Loop Loop::rectangle(int w, int h, int i, int j, const Vertex& corner) {
    if (w < 1 || h < 1 || i == j || i < 1 || i > 4 || j < 1 || j > 4)
        throw LgtError(ErrorKind::Precondition, "bad rectangle parameters");
    std::vector<int> steps;
    steps.insert(steps.end(), w, i);
    steps.insert(steps.end(), h, j);
    steps.insert(steps.end(), w, -i);
    steps.insert(steps.end(), h, -j);
    return Loop(corner, std::move(steps));
}

nlohmann::json Loop::to_json() const {
    nlohmann::json steps = nlohmann::json::array();
    for (int s : steps_) steps.push_back((s > 0 ? "+" : "-") + std::to_string(std::abs(s)));
    return {{"start", start_}, {"steps", steps}};
}

Loop Loop::from_json(const nlohmann::json& doc) {
    Vertex start{0, 0, 0, 0};
    if (doc.contains("start")) start = doc.at("start").get<Vertex>();
    if (doc.contains("rectangle")) {
        const auto& r = doc.at("rectangle");
        return rectangle(r.at("w").get<int>(), r.at("h").get<int>(), r.at("i").get<int>(), r.at("j").get<int>(),
                         start);
    }
    std::vector<int> steps;
    for (const auto& s : doc.at("steps")) {
        if (s.is_number_integer()) {
            steps.push_back(s.get<int>());
            continue;
        }
        std::string t = s.get<std::string>();
        int sign = 1;
        if (t.rfind("\xe2\x88\x92", 0) == 0) {  // U+2212 minus sign
            sign = -1;
            t = t.substr(3);
        } else if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
            sign = t[0] == '-' ? -1 : 1;
            t = t.substr(1);
        }
        if (t.size() != 1 || t[0] < '1' || t[0] > '4')
            throw LgtError(ErrorKind::Config, "bad loop step '" + s.get<std::string>() + "'");
        steps.push_back(sign * (t[0] - '0'));
    }
    return Loop(start, std::move(steps));
}

Loop random_loop(const CubeRegion& region, std::size_t max_length, std::mt19937_64& rng) {
    if (max_length < 4) throw LgtError(ErrorKind::Precondition, "loops have length >= 4");
    std::uniform_int_distribution<int> dir(1, 4);
    int i = dir(rng), j = dir(rng);
    while (j == i) j = dir(rng);
    Vertex corner;
    for (int d = 0; d < 4; ++d) {
        const int hi = region.side - ((d + 1 == i || d + 1 == j) ? 1 : 0);
        corner[d] = region.corner[d] + std::uniform_int_distribution<int>(0, hi)(rng);
    }
    Loop loop = Loop::rectangle(1, 1, i, j, corner);
    const std::size_t target = 4 + 2 * std::uniform_int_distribution<std::size_t>(0, (max_length - 4) / 2)(rng);

    std::size_t attempts = 0;
    while (loop.length() < target && attempts++ < 100000) {
        const auto& st = loop.steps();
        const std::size_t pos = std::uniform_int_distribution<std::size_t>(0, st.size() - 1)(rng);
        const int s = st[pos];
        int t = dir(rng);
        if (t == std::abs(s)) continue;
        if (rng() & 1) t = -t;
        std::vector<int> next(st.begin(), st.begin() + static_cast<std::ptrdiff_t>(pos));
        next.insert(next.end(), {t, s, -t});
        next.insert(next.end(), st.begin() + static_cast<std::ptrdiff_t>(pos) + 1, st.end());
        Loop cand(loop.start(), std::move(next));
        bool inside = true;
        for (const auto& v : cand.vertices())
            if (!region.contains(v)) {
                inside = false;
                break;
            }
        if (inside && cand.is_self_avoiding()) loop = std::move(cand);
    }
    return loop;
}

}  // namespace lgt
