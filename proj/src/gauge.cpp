#include "lgt/gauge.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <numeric>
#include <ostream>

namespace lgt {

namespace {

std::uint8_t bit(int dir0) { return static_cast<std::uint8_t>(1u << dir0); }

// Edge reached by stepping from v along s (+-1..+-4), with the neighbour vertex.
std::optional<std::pair<std::size_t, Vertex>> step(const CellComplex& cx, const Vertex& v, int s) {
    const int d = std::abs(s) - 1;
    Vertex w = v;
    w[d] += s > 0 ? 1 : -1;
    if (!cx.region().contains(w)) return std::nullopt;
    const Vertex base = s > 0 ? v : w;
    return std::make_pair(*cx.find(base, bit(d)), w);
}

}  // namespace

SpanningTree bfs_tree(const CellComplex& cx, const Vertex& root, const std::array<int, 8>& priority) {
    SpanningTree t;
    t.root = cx.vertex_index(root);
    t.in_tree.assign(cx.count(1), 0);
    t.parent_edge.assign(cx.count(0), -1);
    std::vector<char> seen(cx.count(0), 0);
    std::deque<Vertex> queue{root};
    seen[t.root] = 1;
    t.order.push_back(t.root);
    while (!queue.empty()) {
        const Vertex v = queue.front();
        queue.pop_front();
        for (int s : priority) {
            auto nb = step(cx, v, s);
            if (!nb) continue;
            const std::size_t wi = cx.vertex_index(nb->second);
            if (seen[wi]) continue;
            seen[wi] = 1;
            t.in_tree[nb->first] = 1;
            t.parent_edge[wi] = static_cast<std::ptrdiff_t>(nb->first);
            t.order.push_back(wi);
            queue.push_back(nb->second);
        }
    }
    return t;
}

SpanningTree random_tree(const CellComplex& cx, const Vertex& root, std::mt19937_64& rng) {
    // Randomized Prim: grow from the root through a uniformly chosen frontier edge.
    SpanningTree t;
    t.root = cx.vertex_index(root);
    t.in_tree.assign(cx.count(1), 0);
    t.parent_edge.assign(cx.count(0), -1);
    std::vector<char> seen(cx.count(0), 0);
    std::vector<std::pair<std::size_t, std::size_t>> frontier;  // (edge, from vertex)
    auto expand = [&](std::size_t v) {
        const Vertex x = cx.vertex(v);
        for (int s : {1, 2, 3, 4, -1, -2, -3, -4})
            if (auto nb = step(cx, x, s)) frontier.emplace_back(nb->first, v);
    };
    seen[t.root] = 1;
    t.order.push_back(t.root);
    expand(t.root);
    while (!frontier.empty()) {
        const std::size_t k = std::uniform_int_distribution<std::size_t>(0, frontier.size() - 1)(rng);
        const auto [e, from] = frontier[k];
        frontier[k] = frontier.back();
        frontier.pop_back();
        const std::size_t w = cx.edge_tail(e) == from ? cx.edge_head(e) : cx.edge_tail(e);
        if (seen[w]) continue;
        seen[w] = 1;
        t.in_tree[e] = 1;
        t.parent_edge[w] = static_cast<std::ptrdiff_t>(e);
        t.order.push_back(w);
        expand(w);
    }
    return t;
}

bool is_spanning_tree(const CellComplex& cx, const SpanningTree& tree) {
    const std::size_t nv = cx.count(0);
    if (std::count(tree.in_tree.begin(), tree.in_tree.end(), 1) != static_cast<std::ptrdiff_t>(nv - 1)) return false;
    // Union-find: nv - 1 edges with no cycle connect everything.
    std::vector<std::size_t> parent(nv);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t e = 0; e < cx.count(1); ++e) {
        if (!tree.in_tree[e]) continue;
        const auto a = find(cx.edge_tail(e)), b = find(cx.edge_head(e));
        if (a == b) return false;
        parent[a] = b;
    }
    return true;
}

EdgeConfig identity_config(const CellComplex& cx) { return EdgeConfig(cx.count(1), 0); }

Elem plaquette_holonomy(const CellComplex& cx, const GroupTable& g, const EdgeConfig& sigma, std::size_t p,
                        int start_corner, bool reversed) {
    const auto& edges = cx.plaquette_edges(p);
    Elem acc = 0;
    for (int k = 0; k < 4; ++k) {
        int idx = (start_corner + k) % 4;
        int orient = edges[idx].orientation;
        if (reversed) {
            idx = ((start_corner - 1 - k) % 4 + 4) % 4;
            orient = -edges[idx].orientation;
        }
        const Elem v = sigma[edges[idx].edge];
        acc = g.mul(acc, orient > 0 ? v : g.inv(v));
    }
    return acc;
}

double action(const CellComplex& cx, const UnitaryRep& rep, const EdgeConfig& sigma) {
    double s = 0.0;
    for (std::size_t p = 0; p < cx.count(2); ++p) s += rep.gap(plaquette_holonomy(cx, rep.group(), sigma, p));
    return s;
}

double boltzmann_weight(const CellComplex& cx, const UnitaryRep& rep, const EdgeConfig& sigma, double beta) {
    return std::exp(-beta * action(cx, rep, sigma));
}

Elem loop_holonomy(const CellComplex& cx, const GroupTable& g, const EdgeConfig& sigma, const Loop& loop) {
    Elem acc = 0;
    for (const auto& de : loop.edges(cx)) {
        const Elem v = sigma[de.edge];
        acc = g.mul(acc, de.orientation > 0 ? v : g.inv(v));
    }
    return acc;
}

Complex wilson_loop(const CellComplex& cx, const UnitaryRep& rep, const EdgeConfig& sigma, const Loop& loop) {
    if (!loop.is_closed()) throw LgtError(ErrorKind::Precondition, "Wilson loop needs a closed loop");
    return rep.character(loop_holonomy(cx, rep.group(), sigma, loop));
}

EdgeConfig gauge_transform(const CellComplex& cx, const GroupTable& g, const EdgeConfig& sigma,
                           const GaugeTransform& h) {
    EdgeConfig out(sigma.size());
    for (std::size_t e = 0; e < sigma.size(); ++e)
        out[e] = g.mul(g.mul(h[cx.edge_tail(e)], sigma[e]), g.inv(h[cx.edge_head(e)]));
    return out;
}

std::pair<EdgeConfig, GaugeTransform> gauge_fix(const CellComplex& cx, const GroupTable& g,
                                                const EdgeConfig& sigma, const SpanningTree& tree) {
    GaugeTransform h(cx.count(0), 0);
    for (std::size_t v : tree.order) {
        const auto pe = tree.parent_edge[v];
        if (pe < 0) continue;
        const auto e = static_cast<std::size_t>(pe);
        // Choose h_v so that h_tail sigma_e h_head^-1 = 1 on the tree edge.
        if (cx.edge_head(e) == v)
            h[v] = g.mul(h[cx.edge_tail(e)], sigma[e]);
        else
            h[v] = g.mul(h[cx.edge_head(e)], g.inv(sigma[e]));
    }
    return {gauge_transform(cx, g, sigma, h), h};
}

PlaquetteSet support(const CellComplex& cx, const GroupTable& g, const EdgeConfig& sigma) {
    PlaquetteSet out;
    for (std::size_t p = 0; p < cx.count(2); ++p)
        if (plaquette_holonomy(cx, g, sigma, p) != 0) out.push_back(p);
    return out;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::istream& in) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        const int c = in.get();
        if (c == EOF) throw LgtError(ErrorKind::Config, "truncated snapshot");
        v |= static_cast<std::uint32_t>(c & 0xff) << (8 * i);
    }
    return v;
}

constexpr std::uint32_t kMagic = 0x4354474c;  // "LGTC"

}  // namespace

void write_snapshot(std::ostream& out, const CellComplex& cx, const std::string& group_id, const EdgeConfig& sigma) {
    if (sigma.size() != cx.count(1)) throw LgtError(ErrorKind::Precondition, "config size does not match region");
    put_u32(out, kMagic);
    put_u32(out, 1);
    for (int c : cx.region().corner) put_u32(out, static_cast<std::uint32_t>(c));
    put_u32(out, static_cast<std::uint32_t>(cx.side()));
    put_u32(out, static_cast<std::uint32_t>(group_id.size()));
    out.write(group_id.data(), static_cast<std::streamsize>(group_id.size()));
    put_u32(out, static_cast<std::uint32_t>(sigma.size()));
    for (Elem v : sigma) {
        out.put(static_cast<char>(v & 0xff));
        out.put(static_cast<char>((v >> 8) & 0xff));
    }
}

Snapshot read_snapshot(std::istream& in) {
    if (get_u32(in) != kMagic) throw LgtError(ErrorKind::Config, "not a config snapshot");
    if (get_u32(in) != 1) throw LgtError(ErrorKind::Config, "unsupported snapshot version");
    Snapshot s;
    for (int& c : s.region.corner) c = static_cast<int>(get_u32(in));
    s.region.side = static_cast<int>(get_u32(in));
    s.group_id.resize(get_u32(in));
    in.read(s.group_id.data(), static_cast<std::streamsize>(s.group_id.size()));
    const std::uint32_t n = get_u32(in);
    s.sigma.resize(n);
    for (auto& v : s.sigma) {
        const int lo = in.get(), hi = in.get();
        if (hi == EOF) throw LgtError(ErrorKind::Config, "truncated snapshot");
        v = (lo & 0xff) | ((hi & 0xff) << 8);
    }
    return s;
}

}  // namespace lgt
