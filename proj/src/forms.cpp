#include "lgt/forms.hpp"

#include <algorithm>
#include <deque>

namespace lgt {

namespace {

void require_abelian(const GroupTable& g) {
    if (!g.is_abelian()) throw LgtError(ErrorKind::Precondition, "differential forms need an Abelian group");
}

void require_size(const CellComplex& cx, int degree, std::size_t n) {
    if (degree < 0 || degree > 4) throw LgtError(ErrorKind::Degree, "form degree must be in 0..4");
    if (n != cx.count(degree)) throw LgtError(ErrorKind::Precondition, "form size does not match the region");
}

Elem signed_sum(const GroupTable& g, Elem acc, Elem v, std::int64_t coeff) {
    if (coeff == 1) return g.mul(acc, v);
    if (coeff == -1) return g.mul(acc, g.inv(v));
    return g.mul(acc, g.power(v, coeff));
}

}  // namespace

KForm zero_form(const CellComplex& cx, int degree) {
    require_size(cx, degree, cx.count(degree));
    return {degree, std::vector<Elem>(cx.count(degree), 0)};
}

IntForm zero_int_form(const CellComplex& cx, int degree) {
    require_size(cx, degree, cx.count(degree));
    return {degree, IntVector::Zero(static_cast<Eigen::Index>(cx.count(degree)))};
}

KForm edge_indicator(const CellComplex& cx, std::size_t edge, Elem g) {
    KForm f = zero_form(cx, 1);
    f.values.at(edge) = g;
    return f;
}

KForm exterior_derivative(const CellComplex& cx, const GroupTable& g, const KForm& f) {
    require_abelian(g);
    require_size(cx, f.degree, f.values.size());
    if (f.degree >= 4) throw LgtError(ErrorKind::Degree, "exterior derivative of a 4-form");
    const auto& op = cx.boundary(f.degree);
    KForm out{f.degree + 1, std::vector<Elem>(cx.count(f.degree + 1), 0)};
    for (Eigen::Index r = 0; r < op.outerSize(); ++r) {
        Elem acc = 0;
        for (IncidenceMatrix::InnerIterator it(op, r); it; ++it) acc = signed_sum(g, acc, f.values[it.col()], it.value());
        out.values[r] = acc;
    }
    return out;
}

KForm coderivative(const CellComplex& cx, const GroupTable& g, const KForm& f) {
    require_abelian(g);
    require_size(cx, f.degree, f.values.size());
    if (f.degree <= 0) throw LgtError(ErrorKind::Degree, "coderivative of a 0-form");
    const auto& op = cx.coboundary(f.degree - 1);
    KForm out{f.degree - 1, std::vector<Elem>(cx.count(f.degree - 1), 0)};
    for (Eigen::Index r = 0; r < op.outerSize(); ++r) {
        Elem acc = 0;
        for (IncidenceMatrix::InnerIterator it(op, r); it; ++it) acc = signed_sum(g, acc, f.values[it.col()], it.value());
        out.values[r] = acc;
    }
    return out;
}

IntForm exterior_derivative(const CellComplex& cx, const IntForm& f) {
    require_size(cx, f.degree, static_cast<std::size_t>(f.values.size()));
    if (f.degree >= 4) throw LgtError(ErrorKind::Degree, "exterior derivative of a 4-form");
    return {f.degree + 1, cx.boundary(f.degree) * f.values};
}

IntForm coderivative(const CellComplex& cx, const IntForm& f) {
    require_size(cx, f.degree, static_cast<std::size_t>(f.values.size()));
    if (f.degree <= 0) throw LgtError(ErrorKind::Degree, "coderivative of a 0-form");
    return {f.degree - 1, cx.coboundary(f.degree - 1) * f.values};
}

Elem pairing(const GroupTable& g, const KForm& f, const IntForm& h) {
    require_abelian(g);
    if (f.degree != h.degree || f.values.size() != static_cast<std::size_t>(h.values.size()))
        throw LgtError(ErrorKind::Precondition, "pairing needs forms of equal degree and size");
    Elem acc = 0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        if (h.values[static_cast<Eigen::Index>(i)] != 0)
            acc = signed_sum(g, acc, f.values[i], h.values[static_cast<Eigen::Index>(i)]);
    return acc;
}

IntForm loop_form(const CellComplex& cx, const Loop& loop) {
    IntForm out = zero_int_form(cx, 1);
    for (const auto& de : loop.edges(cx)) out.values[static_cast<Eigen::Index>(de.edge)] += de.orientation;
    return out;
}

IntForm surface_fill(const CellComplex& cx, const IntForm& cycle) {
    if (cycle.degree != 1) throw LgtError(ErrorKind::Degree, "surface_fill needs a 1-form");
    if (coderivative(cx, cycle).values.any())
        throw LgtError(ErrorKind::NotACycle, "input 1-form has nonzero coderivative");
    IntForm surface = zero_int_form(cx, 2);
    if (!cycle.values.any()) return surface;

    Vertex lo, hi;
    lo.fill(std::numeric_limits<int>::max());
    hi.fill(std::numeric_limits<int>::min());
    for (std::size_t e = 0; e < cx.count(1); ++e) {
        if (cycle.values[static_cast<Eigen::Index>(e)] == 0) continue;
        const auto c = cx.cell(1, e);
        const int dir = cx.edge_direction(e);
        for (int k = 0; k < 4; ++k) {
            lo[k] = std::min(lo[k], c.base[k]);
            hi[k] = std::max(hi[k], c.base[k] + (k == dir ? 1 : 0));
        }
    }

    IntVector z = cycle.values;
    // Sweep direction d from the top level down: every edge (x, i) with i < d above the
    // bottom face is pushed across the plaquette (x - e_d, {i, d}).
    for (int d = 3; d >= 1; --d) {
        for (int level = hi[d]; level > lo[d]; --level) {
            Vertex x;
            x[d] = level;
            auto visit = [&](auto&& self, int k) -> void {
                if (k == 4) {
                    for (int i = 0; i < d; ++i) {
                        auto e = cx.find(x, static_cast<std::uint8_t>(1u << i));
                        if (!e) continue;
                        const std::int64_t c = z[static_cast<Eigen::Index>(*e)];
                        if (c == 0) continue;
                        Vertex base = x;
                        base[d] -= 1;
                        const std::size_t p = *cx.find(base, static_cast<std::uint8_t>((1u << i) | (1u << d)));
                        // The pushed edge enters the plaquette boundary with sign -1.
                        const std::int64_t a = -c;
                        surface.values[static_cast<Eigen::Index>(p)] += a;
                        for (const auto& pe : cx.plaquette_edges(p))
                            z[static_cast<Eigen::Index>(pe.edge)] -= a * pe.orientation;
                    }
                    return;
                }
                if (k == d) {
                    self(self, k + 1);
                    return;
                }
                for (x[k] = lo[k]; x[k] <= hi[k]; ++x[k]) self(self, k + 1);
            };
            visit(visit, 0);
        }
    }
    if (z.any()) throw std::logic_error("surface_fill: sweep left a residual cycle");
    if ((coderivative(cx, surface).values - cycle.values).any())
        throw std::logic_error("surface_fill: postcondition failed");
    return surface;
}

IntForm surface_fill(const CellComplex& cx, const Loop& loop) { return surface_fill(cx, loop_form(cx, loop)); }

KForm poincare_primitive(const CellComplex& cx, const GroupTable& g, const KForm& q) {
    require_abelian(g);
    if (q.degree != 2) throw LgtError(ErrorKind::Degree, "poincare_primitive needs a 2-form");
    const KForm dq = exterior_derivative(cx, g, q);
    if (std::any_of(dq.values.begin(), dq.values.end(), [](Elem v) { return v != 0; }))
        throw LgtError(ErrorKind::NotClosed, "dq != 0");

    // Spanning tree: BFS through boundary edges first, then into the interior, so that
    // every boundary edge's fundamental cycle stays on the boundary.
    const std::size_t nv = cx.count(0), ne = cx.count(1);
    const CubeRegion& region = cx.region();
    std::vector<std::ptrdiff_t> parent_edge(nv, -1);
    std::vector<bool> seen(nv, false), tree(ne, false);
    std::vector<std::vector<std::size_t>> incident(nv);
    for (std::size_t e = 0; e < ne; ++e) {
        incident[cx.edge_tail(e)].push_back(e);
        incident[cx.edge_head(e)].push_back(e);
    }
    auto on_boundary = [&](std::size_t e) { return classify(cx.cell(1, e), region) == CellPosition::OnBoundary; };
    std::deque<std::size_t> queue{0};
    seen[0] = true;
    std::vector<std::size_t> reached{0};
    for (int phase = 0; phase < 2; ++phase) {
        if (phase == 1) queue.assign(reached.begin(), reached.end());
        while (!queue.empty()) {
            const std::size_t v = queue.front();
            queue.pop_front();
            for (std::size_t e : incident[v]) {
                if (phase == 0 && !on_boundary(e)) continue;
                const std::size_t w = cx.edge_tail(e) == v ? cx.edge_head(e) : cx.edge_tail(e);
                if (seen[w]) continue;
                seen[w] = true;
                tree[e] = true;
                parent_edge[w] = static_cast<std::ptrdiff_t>(e);
                queue.push_back(w);
                reached.push_back(w);
            }
        }
    }

    // Chain of tree edges from the root to v.
    auto add_path = [&](IntVector& chain, std::size_t v, int sign) {
        while (parent_edge[v] >= 0) {
            const auto e = static_cast<std::size_t>(parent_edge[v]);
            const bool forward = cx.edge_head(e) == v;
            chain[static_cast<Eigen::Index>(e)] += sign * (forward ? 1 : -1);
            v = forward ? cx.edge_tail(e) : cx.edge_head(e);
        }
    };

    KForm h = zero_form(cx, 1);
    for (std::size_t e = 0; e < ne; ++e) {
        if (tree[e]) continue;
        IntForm cyc = zero_int_form(cx, 1);
        add_path(cyc.values, cx.edge_tail(e), 1);
        cyc.values[static_cast<Eigen::Index>(e)] += 1;
        add_path(cyc.values, cx.edge_head(e), -1);
        h.values[e] = pairing(g, q, surface_fill(cx, cyc));
    }
    return h;
}

nlohmann::json to_json(const KForm& f) { return {{"degree", f.degree}, {"values", f.values}}; }

nlohmann::json to_json(const IntForm& f) {
    std::vector<std::int64_t> v(f.values.data(), f.values.data() + f.values.size());
    return {{"degree", f.degree}, {"values", v}};
}

KForm kform_from_json(const nlohmann::json& doc) {
    return {doc.at("degree").get<int>(), doc.at("values").get<std::vector<Elem>>()};
}

IntForm intform_from_json(const nlohmann::json& doc) {
    const auto v = doc.at("values").get<std::vector<std::int64_t>>();
    IntForm f{doc.at("degree").get<int>(), IntVector(static_cast<Eigen::Index>(v.size()))};
    for (std::size_t i = 0; i < v.size(); ++i) f.values[static_cast<Eigen::Index>(i)] = v[i];
    return f;
}

}  // namespace lgt
