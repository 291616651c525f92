#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "lgt/catalog.hpp"
#include "lgt/forms.hpp"
#include "lgt/gauge.hpp"

using namespace lgt;

namespace {

EdgeConfig random_config(const CellComplex& cx, const GroupTable& g, std::mt19937_64& rng) {
    std::uniform_int_distribution<Elem> pick(0, g.order() - 1);
    EdgeConfig s(cx.count(1));
    for (auto& v : s) v = pick(rng);
    return s;
}

GaugeTransform random_transform(const CellComplex& cx, const GroupTable& g, std::mt19937_64& rng) {
    std::uniform_int_distribution<Elem> pick(0, g.order() - 1);
    GaugeTransform h(cx.count(0));
    for (auto& v : h) v = pick(rng);
    return h;
}

const CellComplex& cube3() {
    static const CellComplex cx({{0, 0, 0, 0}, 2});
    return cx;
}

}  // namespace

TEST(Trees, BfsAndRandomTreesSpan) {
    CellComplex one({{0, 0, 0, 0}, 1});
    auto t = bfs_tree(one, {0, 0, 0, 0});
    EXPECT_TRUE(is_spanning_tree(one, t));
    EXPECT_EQ(std::count(t.in_tree.begin(), t.in_tree.end(), 1), 15);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 5; ++i) EXPECT_TRUE(is_spanning_tree(cube3(), random_tree(cube3(), {2, 0, 1, 2}, rng)));
    auto far = bfs_tree(cube3(), {2, 2, 2, 2}, {-4, -3, -2, -1, 4, 3, 2, 1});
    EXPECT_TRUE(is_spanning_tree(cube3(), far));
    EXPECT_NE(far.in_tree, bfs_tree(cube3(), {0, 0, 0, 0}).in_tree);
    auto broken = t;
    broken.in_tree[t.parent_edge[3]] = 0;
    EXPECT_FALSE(is_spanning_tree(one, broken));
}

TEST(Holonomy, IdentityAndAbelianDerivative) {
    std::mt19937_64 rng(2);
    auto g = build_cyclic(6);
    const auto& cx = cube3();
    auto id = identity_config(cx);
    for (std::size_t p = 0; p < cx.count(2); ++p) EXPECT_EQ(plaquette_holonomy(cx, *g, id, p), 0);
    auto sigma = random_config(cx, *g, rng);
    auto dsigma = exterior_derivative(cx, *g, KForm{1, sigma});
    for (std::size_t p = 0; p < cx.count(2); ++p) EXPECT_EQ(plaquette_holonomy(cx, *g, sigma, p), dsigma.values[p]);
    EXPECT_EQ(support(cx, *g, sigma), [&] {
        PlaquetteSet s;
        for (std::size_t p = 0; p < cx.count(2); ++p)
            if (dsigma.values[p] != 0) s.push_back(p);
        return s;
    }());
}

TEST(Holonomy, CornerAndOrientationInNonAbelianGroup) {
    std::mt19937_64 rng(3);
    auto rep = rep_by_id("s3-std2");
    const auto& g = rep->group();
    const auto& cx = cube3();
    auto sigma = random_config(cx, g, rng);
    for (std::size_t p = 0; p < cx.count(2); ++p) {
        const Elem base = plaquette_holonomy(cx, g, sigma, p);
        for (int k = 0; k < 4; ++k) {
            const Elem fwd = plaquette_holonomy(cx, g, sigma, p, k, false);
            const Elem rev = plaquette_holonomy(cx, g, sigma, p, k, true);
            EXPECT_EQ(g.class_of(fwd), g.class_of(base));
            EXPECT_EQ(g.class_of(rev), g.class_of(g.inv(base)));
            EXPECT_EQ(rep->gap(rev), rep->gap(base));
            EXPECT_EQ(rep->gap(fwd), rep->gap(base));
        }
    }
}

TEST(Action, SingleFlippedBulkEdge) {
    auto rep = rep_by_id("z2-sign");
    const auto& cx = cube3();
    auto sigma = identity_config(cx);
    EXPECT_EQ(action(cx, *rep, sigma), 0.0);
    EXPECT_EQ(boltzmann_weight(cx, *rep, sigma, 0.7), 1.0);
    const std::size_t e = *cx.find({1, 1, 1, 0}, 0b1000);
    sigma[e] = 1;
    EXPECT_EQ(action(cx, *rep, sigma), 12.0);
    EXPECT_DOUBLE_EQ(boltzmann_weight(cx, *rep, sigma, 0.7), std::exp(-12 * 0.7));
    EXPECT_EQ(support(cx, rep->group(), sigma), minimal_vortex(cx, e));
}

TEST(Wilson, BasicValues) {
    const auto& cx = cube3();
    for (const char* id : {"z2-sign", "s3-std2", "q8-2d"}) {
        auto rep = rep_by_id(id);
        auto loop = Loop::rectangle(2, 1, 1, 4, {0, 1, 0, 0});
        EXPECT_EQ(wilson_loop(cx, *rep, identity_config(cx), loop), Complex(rep->dim(), 0.0));
    }
    auto z2 = rep_by_id("z2-sign");
    auto loop = Loop::rectangle(2, 2, 2, 3, {1, 0, 0, 1});
    auto sigma = identity_config(cx);
    sigma[loop.edges(cx)[3].edge] = 1;
    EXPECT_EQ(wilson_loop(cx, *z2, sigma, loop), Complex(-1.0, 0.0));
    EXPECT_THROW(wilson_loop(cx, *z2, sigma, Loop({0, 0, 0, 0}, {1})), LgtError);
}

TEST(GaugeInvariance, RandomOrbits) {
    std::mt19937_64 rng(4);
    const auto& cx = cube3();
    for (const char* id : {"z2-sign", "z6-k1", "s3-std2", "q8-2d"}) {
        SCOPED_TRACE(id);
        auto rep = rep_by_id(id);
        const auto& g = rep->group();
        auto sigma = random_config(cx, g, rng);
        const auto loop = random_loop(cx.region(), 16, rng);
        const double s0 = action(cx, *rep, sigma);
        const Complex w0 = wilson_loop(cx, *rep, sigma, loop);
        const auto supp0 = support(cx, g, sigma);
        for (int t = 0; t < 100; ++t) {
            auto tau = gauge_transform(cx, g, sigma, random_transform(cx, g, rng));
            EXPECT_EQ(action(cx, *rep, tau), s0);
            EXPECT_EQ(boltzmann_weight(cx, *rep, tau, 0.9), boltzmann_weight(cx, *rep, sigma, 0.9));
            EXPECT_EQ(wilson_loop(cx, *rep, tau, loop), w0);
            EXPECT_EQ(support(cx, g, tau), supp0);
        }
    }
}

TEST(GaugeTransform, IdentityAndNontrivial) {
    std::mt19937_64 rng(5);
    auto g = build_symmetric(3);
    const auto& cx = cube3();
    auto sigma = random_config(cx, *g, rng);
    EXPECT_EQ(gauge_transform(cx, *g, sigma, GaugeTransform(cx.count(0), 0)), sigma);
    for (Elem x = 1; x < g->order(); ++x) {
        GaugeTransform h(cx.count(0), 0);
        h[17] = x;
        EXPECT_NE(gauge_transform(cx, *g, sigma, h), sigma);
    }
}

TEST(GaugeFix, RepresentativesAndWitness) {
    std::mt19937_64 rng(6);
    const auto& cx = cube3();
    const auto tree = bfs_tree(cx, {0, 0, 0, 0});
    auto rep = rep_by_id("z3-k1");
    const auto& g = rep->group();
    for (int t = 0; t < 20; ++t) {
        auto sigma = random_config(cx, g, rng);
        auto [fixed, h] = gauge_fix(cx, g, sigma, tree);
        EXPECT_EQ(h[tree.root], 0);
        for (std::size_t e = 0; e < cx.count(1); ++e)
            if (tree.in_tree[e]) EXPECT_EQ(fixed[e], 0);
        EXPECT_EQ(gauge_transform(cx, g, sigma, h), fixed);
        auto loop = random_loop(cx.region(), 12, rng);
        EXPECT_EQ(wilson_loop(cx, *rep, fixed, loop), wilson_loop(cx, *rep, sigma, loop));
        auto again = gauge_fix(cx, g, fixed, tree);
        EXPECT_EQ(again.first, fixed);
        EXPECT_TRUE(std::all_of(again.second.begin(), again.second.end(), [](Elem v) { return v == 0; }));
        // Abelian: every orbit member fixes to the same representative.
        auto moved = gauge_transform(cx, g, sigma, random_transform(cx, g, rng));
        EXPECT_EQ(gauge_fix(cx, g, moved, tree).first, fixed);
    }
}

TEST(GaugeFix, NonAbelianOrbitsKeepObservables) {
    std::mt19937_64 rng(7);
    const auto& cx = cube3();
    const auto tree = bfs_tree(cx, {0, 0, 0, 0});
    for (const char* id : {"s3-std2", "q8-2d"}) {
        auto rep = rep_by_id(id);
        const auto& g = rep->group();
        for (int t = 0; t < 10; ++t) {
            auto sigma = random_config(cx, g, rng);
            auto fixed = gauge_fix(cx, g, sigma, tree).first;
            auto moved = gauge_fix(cx, g, gauge_transform(cx, g, fixed, random_transform(cx, g, rng)), tree).first;
            EXPECT_EQ(support(cx, g, moved), support(cx, g, fixed));
            auto loop = random_loop(cx.region(), 12, rng);
            EXPECT_EQ(wilson_loop(cx, *rep, moved, loop), wilson_loop(cx, *rep, fixed, loop));
            for (std::size_t p = 0; p < cx.count(2); ++p)
                EXPECT_EQ(g.class_of(plaquette_holonomy(cx, g, moved, p)),
                          g.class_of(plaquette_holonomy(cx, g, sigma, p)));
        }
    }
}

TEST(Snapshot, RoundTrip) {
    std::mt19937_64 rng(8);
    const auto& cx = cube3();
    auto g = build_quaternion();
    auto sigma = random_config(cx, *g, rng);
    std::stringstream buf;
    write_snapshot(buf, cx, "q8", sigma);
    const auto bytes = buf.str();
    EXPECT_EQ(bytes.substr(0, 4), "LGTC");
    auto snap = read_snapshot(buf);
    EXPECT_EQ(snap.group_id, "q8");
    EXPECT_EQ(snap.region.side, 2);
    EXPECT_EQ(snap.sigma, sigma);
    std::stringstream bad("nope");
    EXPECT_THROW(read_snapshot(bad), LgtError);
}
