#include <gtest/gtest.h>

#include <random>

#include "lgt/catalog.hpp"
#include "lgt/forms.hpp"

using namespace lgt;

namespace {

KForm random_form(const CellComplex& cx, const GroupTable& g, int degree, std::mt19937_64& rng) {
    std::uniform_int_distribution<Elem> pick(0, g.order() - 1);
    KForm f = zero_form(cx, degree);
    for (auto& v : f.values) v = pick(rng);
    return f;
}

bool is_zero(const KForm& f) {
    return std::all_of(f.values.begin(), f.values.end(), [](Elem v) { return v == 0; });
}

const CellComplex& cube3() {
    static const CellComplex cx({{0, 0, 0, 0}, 2});
    return cx;
}

}  // namespace

TEST(ExteriorDerivative, SquaresToZero) {
    std::mt19937_64 rng(1);
    for (int n : {2, 3, 6}) {
        auto g = build_cyclic(n);
        for (int t = 0; t < 100; ++t) {
            for (int k = 0; k <= 2; ++k) {
                auto f = random_form(cube3(), *g, k, rng);
                EXPECT_TRUE(is_zero(exterior_derivative(cube3(), *g, exterior_derivative(cube3(), *g, f))));
            }
            for (int k = 2; k <= 4; ++k) {
                auto f = random_form(cube3(), *g, k, rng);
                EXPECT_TRUE(is_zero(coderivative(cube3(), *g, coderivative(cube3(), *g, f))));
            }
        }
    }
}

TEST(ExteriorDerivative, ZeroAndDegreeErrors) {
    auto g = build_cyclic(3);
    EXPECT_TRUE(is_zero(exterior_derivative(cube3(), *g, zero_form(cube3(), 1))));
    EXPECT_TRUE(is_zero(coderivative(cube3(), *g, zero_form(cube3(), 2))));
    try {
        exterior_derivative(cube3(), *g, zero_form(cube3(), 4));
        FAIL();
    } catch (const LgtError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Degree);
    }
    EXPECT_THROW(coderivative(cube3(), *g, zero_form(cube3(), 0)), LgtError);
    EXPECT_THROW(exterior_derivative(cube3(), *build_symmetric(3), zero_form(cube3(), 1)), LgtError);
}

TEST(ExteriorDerivative, SingleEdgeIndicator) {
    auto g = build_cyclic(5);
    const std::size_t e = *cube3().find({1, 1, 1, 1}, 1);
    auto df = exterior_derivative(cube3(), *g, edge_indicator(cube3(), e, 2));
    const auto pe = minimal_vortex(cube3(), e);
    ASSERT_EQ(pe.size(), 6u);
    for (std::size_t p = 0; p < df.values.size(); ++p) {
        const bool in = std::binary_search(pe.begin(), pe.end(), p);
        if (!in) {
            EXPECT_EQ(df.values[p], 0);
            continue;
        }
        const int s = incidence(cube3().cell(1, e), cube3().cell(2, p));
        EXPECT_EQ(df.values[p], s > 0 ? 2 : g->inv(2));
    }
}

TEST(Coderivative, LoopsAndPaths) {
    const auto& cx = cube3();
    auto loop = Loop::rectangle(2, 1, 1, 3, {0, 0, 1, 0});
    EXPECT_FALSE(coderivative(cx, loop_form(cx, loop)).values.any());
    IntForm path = zero_int_form(cx, 1);
    Vertex v{0, 0, 0, 0};
    for (int s : {1, 2, 2, 4}) {
        Vertex base = v;
        path.values[static_cast<Eigen::Index>(*cx.find(base, static_cast<std::uint8_t>(1u << (s - 1))))] += 1;
        v[s - 1] += 1;
    }
    const auto div = coderivative(cx, path);
    for (std::size_t i = 0; i < cx.count(0); ++i) {
        std::int64_t expected = 0;
        if (cx.vertex(i) == v) expected = 1;
        if (cx.vertex(i) == Vertex{0, 0, 0, 0}) expected = -1;
        EXPECT_EQ(div.values[static_cast<Eigen::Index>(i)], expected);
    }
}

TEST(Pairing, StokesIdentity) {
    std::mt19937_64 rng(2);
    auto g = build_cyclic(6);
    std::uniform_int_distribution<int> coeff(-3, 3);
    const auto& cx = cube3();
    for (int t = 0; t < 1000; ++t) {
        auto f = random_form(cx, *g, 1, rng);
        IntForm h = zero_int_form(cx, 2);
        for (Eigen::Index i = 0; i < h.values.size(); ++i) h.values[i] = coeff(rng);
        EXPECT_EQ(pairing(*g, f, coderivative(cx, h)), pairing(*g, exterior_derivative(cx, *g, f), h));
    }
    auto f = random_form(cx, *g, 1, rng);
    EXPECT_EQ(pairing(*g, f, zero_int_form(cx, 1)), 0);
}

TEST(Pairing, LoopPairingIsOrderedSum) {
    std::mt19937_64 rng(3);
    auto g = build_cyclic(7);
    CellComplex cx({{0, 0, 0, 0}, 4});
    for (int t = 0; t < 50; ++t) {
        auto sigma = random_form(cx, *g, 1, rng);
        auto loop = random_loop(cx.region(), 24, rng);
        Elem direct = 0;
        for (const auto& de : loop.edges(cx))
            direct = g->mul(direct, de.orientation > 0 ? sigma.values[de.edge] : g->inv(sigma.values[de.edge]));
        EXPECT_EQ(pairing(*g, sigma, loop_form(cx, loop)), direct);
    }
}

TEST(SurfaceFill, UnitSquareAndRectangle) {
    const auto& cx = cube3();
    auto sq = Loop::rectangle(1, 1, 2, 4, {1, 0, 1, 0});
    auto s = surface_fill(cx, sq);
    const std::size_t p = *cx.find({1, 0, 1, 0}, 0b1010);
    EXPECT_EQ(std::abs(s.values[static_cast<Eigen::Index>(p)]), 1);
    EXPECT_EQ(s.values.cwiseAbs().sum(), 1);

    CellComplex big({{0, 0, 0, 0}, 4});
    auto rect = Loop::rectangle(2, 3, 1, 3, {1, 0, 0, 1});
    auto sr = surface_fill(big, rect);
    EXPECT_EQ(sr.values.cwiseAbs().sum(), 6);
    EXPECT_EQ(std::abs(sr.values.sum()), 6);
    EXPECT_EQ((coderivative(big, sr).values - loop_form(big, rect).values).cwiseAbs().sum(), 0);
    for (Eigen::Index i = 0; i < sr.values.size(); ++i) {
        if (sr.values[i] == 0) continue;
        const auto c = big.cell(2, static_cast<std::size_t>(i));
        EXPECT_EQ(c.dirs, 0b0101);
        EXPECT_GE(c.base[0], 1);
        EXPECT_LE(c.base[0], 2);
        EXPECT_GE(c.base[2], 0);
        EXPECT_LE(c.base[2], 2);
    }
}

TEST(SurfaceFill, RandomLoopsOnLargeRegion) {
    std::mt19937_64 rng(4);
    CellComplex cx({{0, 0, 0, 0}, 7});
    for (int t = 0; t < 40; ++t) {
        auto loop = random_loop(cx.region(), 40, rng);
        const auto gamma = loop_form(cx, loop);
        const auto s = surface_fill(cx, gamma);
        EXPECT_FALSE((coderivative(cx, s).values - gamma.values).any());
        Vertex lo{99, 99, 99, 99}, hi{-1, -1, -1, -1};
        for (const auto& v : loop.vertices())
            for (int k = 0; k < 4; ++k) {
                lo[k] = std::min(lo[k], v[k]);
                hi[k] = std::max(hi[k], v[k]);
            }
        for (Eigen::Index i = 0; i < s.values.size(); ++i) {
            if (s.values[i] == 0) continue;
            for (const auto& v : cell_vertices(cx.cell(2, static_cast<std::size_t>(i))))
                for (int k = 0; k < 4; ++k) {
                    EXPECT_GE(v[k], lo[k]);
                    EXPECT_LE(v[k], hi[k]);
                }
        }
    }
}

TEST(SurfaceFill, RejectsOpenPaths) {
    const auto& cx = cube3();
    IntForm path = zero_int_form(cx, 1);
    path.values[0] = 1;
    try {
        surface_fill(cx, path);
        FAIL();
    } catch (const LgtError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotACycle);
    }
}

TEST(SurfaceFill, WilsonLoopEquivalence) {
    std::mt19937_64 rng(5);
    auto rep = rep_by_id("z5-k2");
    const auto& g = rep->group();
    CellComplex cx({{0, 0, 0, 0}, 5});
    for (int t = 0; t < 50; ++t) {
        auto sigma = random_form(cx, g, 1, rng);
        auto loop = random_loop(cx.region(), 30, rng);
        const auto lhs = rep->character(pairing(g, sigma, loop_form(cx, loop)));
        const auto rhs = rep->character(pairing(g, exterior_derivative(cx, g, sigma), surface_fill(cx, loop)));
        EXPECT_EQ(lhs, rhs);
    }
}

TEST(Poincare, PrimitiveRoundTrip) {
    std::mt19937_64 rng(6);
    const auto& cx = cube3();
    for (int n : {2, 3, 6}) {
        auto g = build_cyclic(n);
        EXPECT_TRUE(is_zero(poincare_primitive(cx, *g, zero_form(cx, 2))));
        for (int t = 0; t < 5; ++t) {
            auto q = exterior_derivative(cx, *g, random_form(cx, *g, 1, rng));
            auto h = poincare_primitive(cx, *g, q);
            EXPECT_EQ(exterior_derivative(cx, *g, h).values, q.values);
        }
    }
}

TEST(Poincare, SingleEdgeVortex) {
    auto g = build_cyclic(3);
    const auto& cx = cube3();
    const std::size_t e0 = *cx.find({1, 1, 0, 1}, 0b0100);
    const auto q = exterior_derivative(cx, *g, edge_indicator(cx, e0, 1));
    const auto h = poincare_primitive(cx, *g, q);
    const auto dh = exterior_derivative(cx, *g, h);
    EXPECT_EQ(dh.values, q.values);
    std::vector<std::size_t> supp;
    for (std::size_t p = 0; p < dh.values.size(); ++p)
        if (dh.values[p] != 0) supp.push_back(p);
    EXPECT_EQ(supp, minimal_vortex(cx, e0));
}

TEST(Poincare, VanishesOnBoundaryWhenInputDoes) {
    std::mt19937_64 rng(8);
    CellComplex cx({{0, 0, 0, 0}, 3});
    auto g = build_cyclic(4);
    std::uniform_int_distribution<Elem> pick(0, 3);
    for (int t = 0; t < 3; ++t) {
        KForm sigma = zero_form(cx, 1);
        for (std::size_t e = 0; e < cx.count(1); ++e)
            if (classify(cx.cell(1, e), cx.region()) != CellPosition::OnBoundary) sigma.values[e] = pick(rng);
        const auto q = exterior_derivative(cx, *g, sigma);
        for (std::size_t p = 0; p < q.values.size(); ++p)
            if (classify(cx.cell(2, p), cx.region()) == CellPosition::OnBoundary) ASSERT_EQ(q.values[p], 0);
        const auto h = poincare_primitive(cx, *g, q);
        EXPECT_EQ(exterior_derivative(cx, *g, h).values, q.values);
        for (std::size_t e = 0; e < cx.count(1); ++e)
            if (classify(cx.cell(1, e), cx.region()) == CellPosition::OnBoundary) EXPECT_EQ(h.values[e], 0);
    }
}

TEST(Poincare, RejectsNonClosed) {
    auto g = build_cyclic(3);
    KForm q = zero_form(cube3(), 2);
    q.values[5] = 1;
    try {
        poincare_primitive(cube3(), *g, q);
        FAIL();
    } catch (const LgtError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotClosed);
    }
}

TEST(Forms, JsonRoundTrip) {
    auto g = build_cyclic(3);
    std::mt19937_64 rng(9);
    auto f = random_form(cube3(), *g, 2, rng);
    EXPECT_EQ(kform_from_json(to_json(f)).values, f.values);
    auto s = surface_fill(cube3(), Loop::rectangle(2, 2, 1, 2, {0, 0, 0, 0}));
    EXPECT_EQ(intform_from_json(to_json(s)).values, s.values);
}
