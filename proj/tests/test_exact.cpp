#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstdlib>
#include <random>

#include "lgt/catalog.hpp"
#include "lgt/exact.hpp"

using namespace lgt;

namespace {

const CellComplex& tess() {
    static const CellComplex cx({{0, 0, 0, 0}, 1});
    return cx;
}

const CellComplex& cube3() {
    static const CellComplex cx({{0, 0, 0, 0}, 2});
    return cx;
}

std::size_t edge_at(const CellComplex& cx, Vertex x, int dir) {
    return *cx.find(x, static_cast<std::uint8_t>(1u << (dir - 1)));
}

EnumerationRequest loops_request(std::vector<Loop> loops) {
    EnumerationRequest req;
    req.loops = std::move(loops);
    return req;
}

// Interior plaquettes: not inside any boundary face of the region.
PlaquetteSet interior_plaquettes(const CellComplex& cx) {
    PlaquetteSet out;
    for (std::size_t p = 0; p < cx.count(2); ++p)
        if (classify(cx.cell(2, p), cx.region()) == CellPosition::Interior) out.push_back(p);
    return out;
}

PlaquetteSet unite(PlaquetteSet a, const PlaquetteSet& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

}  // namespace

TEST(GaugeFixedEnumeration, CountsAndTrivialGroup) {
    auto z2 = rep_by_id("z2-sign");
    const auto tree = bfs_tree(tess(), {0, 0, 0, 0});
    EnumerationRequest req;
    req.ngamma = false;
    const auto dos = enumerate_gauge_fixed(tess(), *z2, tree, req);
    EXPECT_EQ(dos.configurations(), std::uint64_t{1} << 17);
    EXPECT_DOUBLE_EQ(dos.log_partition(0.0), 32 * std::log(2.0));

    auto trivial = cyclic_character_rep(build_cyclic(1), 0);
    const auto one = enumerate_gauge_fixed(cube3(), *trivial, bfs_tree(cube3(), {0, 0, 0, 0}), req);
    EXPECT_EQ(one.configurations(), 1u);
    EXPECT_EQ(one.gauge_fixed_sum(3.0), 1.0);

    auto z3 = rep_by_id("z3-k1");
    EnumerationBudget small{1000, 600};
    try {
        enumerate_gauge_fixed(tess(), *z3, tree, req, small);
        FAIL() << "expected a budget error";
    } catch (const LgtError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Budget);
        EXPECT_NE(std::string(e.what()).find("3^17"), std::string::npos);
    }
}

TEST(GaugeFixedEnumeration, BudgetFromEnvironment) {
    ::setenv("LGT_BUDGET", "12345", 1);
    EXPECT_EQ(budget_from_env().max_configs, 12345u);
    ::setenv("LGT_BUDGET", "12x", 1);
    EXPECT_THROW(budget_from_env(), LgtError);
    ::unsetenv("LGT_BUDGET");
    EXPECT_EQ(budget_from_env().max_configs, std::uint64_t{1} << 27);
}

// One Gray-code pass over all 2^32 Z2 configurations, tracking excited plaquettes, the
// loop's sign and N_gamma from support masks, against N1 times the gauge-fixed tables.
TEST(GaugeFixedEnumeration, Z2MatchesFullEnumeration) {
    const auto& cx = tess();
    auto z2 = rep_by_id("z2-sign");
    const auto loop = Loop::rectangle(1, 1, 1, 2, {0, 0, 1, 0});
    const std::size_t ne = cx.count(1), np = cx.count(2), len = loop.length();
    std::vector<std::uint64_t> flip(ne, 0), on_loop(ne, 0);
    for (std::size_t e = 0; e < ne; ++e)
        for (std::size_t p : cx.edge_plaquettes(e)) flip[e] |= std::uint64_t{1} << p;
    for (const auto& de : loop.edges(cx)) on_loop[de.edge] = 1;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> tests;
    for (const auto& de : loop.edges(cx)) {
        std::uint64_t need = 0, near = 0;
        for (std::size_t p : minimal_vortex(cx, de.edge)) need |= std::uint64_t{1} << p;
        for (std::size_t p : minimal_vortex(cx, de.edge))
            for (std::size_t q : cx.plaquette_neighbors(p)) near |= std::uint64_t{1} << q;
        tests.emplace_back(need, near & ~need);
    }
    // table[(k * (len + 1) + n) * 2 + parity]
    std::vector<std::uint64_t> table((np + 1) * (len + 1) * 2, 0);
    std::uint64_t mask = 0;
    int parity = 0;
    auto record = [&] {
        std::size_t n = 0;
        for (auto [need, forbid] : tests) n += (mask & need) == need && (mask & forbid) == 0;
        ++table[(static_cast<std::size_t>(std::popcount(mask)) * (len + 1) + n) * 2 + parity];
    };
    record();
    for (std::uint64_t i = 1; i < (std::uint64_t{1} << ne); ++i) {
        const int b = std::countr_zero(i);
        mask ^= flip[b];
        parity ^= static_cast<int>(on_loop[b]);
        record();
    }

    const auto dos = enumerate_gauge_fixed(cx, *z2, bfs_tree(cx, {0, 0, 0, 0}), loops_request({loop}));
    const std::uint64_t n1 = std::uint64_t{1} << 15;
    ASSERT_EQ(dos.count.size(), np + 1);
    for (std::size_t k = 0; k <= np; ++k) {
        std::uint64_t full = 0;
        std::int64_t signed_sum = 0;
        for (std::size_t n = 0; n <= len; ++n) {
            const auto a = table[(k * (len + 1) + n) * 2], b = table[(k * (len + 1) + n) * 2 + 1];
            full += a + b;
            signed_sum += static_cast<std::int64_t>(a) - static_cast<std::int64_t>(b);
            EXPECT_EQ(a + b, n1 * dos.ngamma[0][k * (len + 1) + n]) << "k=" << k << " n=" << n;
        }
        EXPECT_EQ(full, n1 * dos.count[k]) << "k=" << k;
        EXPECT_EQ(static_cast<double>(signed_sum), static_cast<double>(n1) * dos.wilson[0][k].real());
    }
}

TEST(FullHistogram, CharacterSumMatchesGrayCodeForZ2) {
    const auto& cx = tess();
    const auto fourier = full_histogram_cyclic(cx, 2);
    const auto gray = full_histogram_z2(cx);
    EXPECT_EQ(fourier, gray);
    // Odd-degree terms vanish: the number of excited plaquettes in a closed Z2 form is even.
    EXPECT_EQ(fourier[1], 0u);
    EXPECT_THROW(full_histogram_cyclic(cube3(), 2), LgtError);
    EXPECT_THROW(full_histogram_cyclic(cx, 4), LgtError);
}

TEST(ExactWilson, BasicValuesAndTreeInvariance) {
    const auto& cx = tess();
    auto z2 = rep_by_id("z2-sign");
    const auto loop = Loop::rectangle(1, 1, 2, 3, {0, 0, 0, 1});
    EXPECT_EQ(wilson_exact(cx, *z2, 0.0, loop), Complex(0.0, 0.0));
    std::mt19937_64 rng(21);
    const Loop six({0, 0, 0, 0}, {1, 2, 3, -1, -2, -3});
    ASSERT_TRUE(six.is_self_avoiding());
    for (const char* id : {"z2-sign", "z3-k1"}) {
        SCOPED_TRACE(id);
        auto rep = rep_by_id(id);
        std::vector<SpanningTree> trees{bfs_tree(cx, {0, 0, 0, 0}), random_tree(cx, {0, 1, 1, 0}, rng)};
        if (rep->group().order() == 2) trees.push_back(bfs_tree(cx, {1, 1, 0, 1}, {-4, 3, -2, 1, 4, -3, 2, -1}));
        std::vector<DensityOfStates> runs;
        for (const auto& t : trees) runs.push_back(enumerate_gauge_fixed(cx, *rep, t, loops_request({loop, six})));
        for (double beta : {0.3, 1.0, 2.5}) {
            const double z0 = runs[0].log_partition(beta);
            for (std::size_t i = 1; i < runs.size(); ++i) {
                EXPECT_NEAR(runs[i].log_partition(beta), z0, 1e-10);
                for (std::size_t l = 0; l < 2; ++l) {
                    EXPECT_LE(std::abs(runs[i].wilson_mean(l, beta) - runs[0].wilson_mean(l, beta)), 1e-10);
                    const auto a = runs[i].ngamma_pmf(l, beta), b = runs[0].ngamma_pmf(l, beta);
                    for (std::size_t n = 0; n < a.size(); ++n) EXPECT_NEAR(a[n], b[n], 1e-12);
                }
            }
            const auto w = runs[0].wilson_mean(0, beta);
            EXPECT_LE(std::abs(w.imag()), 1e-10);
            const auto pmf = runs[0].ngamma_pmf(0, beta);
            EXPECT_EQ(pmf.size(), loop.length() + 1);
            double total = 0;
            for (double v : pmf) total += v;
            EXPECT_NEAR(total, 1.0, 1e-12);
        }
        // Strong coupling to weak coupling: the Wilson loop rises towards its dimension.
        EXPECT_LT(runs[0].wilson_mean(0, 0.2).real(), runs[0].wilson_mean(0, 5.0).real());
        EXPECT_NEAR(runs[0].wilson_mean(0, 30.0).real(), rep->dim(), 1e-6);
    }
}

TEST(ExactWilson, ShardingIsDeterministic) {
    auto z2 = rep_by_id("z2-sign");
    const auto loop = Loop::rectangle(1, 1, 1, 4, {0, 0, 0, 0});
    auto req = loops_request({loop});
    const auto tree = bfs_tree(tess(), {0, 0, 0, 0});
    const auto a = enumerate_gauge_fixed(tess(), *z2, tree, req);
    req.jobs = 2;
    const auto b = enumerate_gauge_fixed(tess(), *z2, tree, req);
    EXPECT_EQ(a.count, b.count);
    EXPECT_EQ(a.ngamma, b.ngamma);
    EXPECT_EQ(a.wilson, b.wilson);
    EXPECT_EQ(a.wilson_mean(0, 0.7), b.wilson_mean(0, 0.7));
}

TEST(ExactWilson, SumOfPhiOverClosedSupportsIsGaugeFixedSum) {
    // Z2 on the single 4-cell: closed 2-forms are plaquette subsets with even parity on
    // every 3-cell, each contributing exp(-2 beta |P|).
    const auto& cx = tess();
    std::vector<std::uint32_t> cell_masks;
    for (std::size_t c = 0; c < cx.count(3); ++c) {
        std::uint32_t m = 0;
        for (const auto& f : cx.faces(3, c)) m |= 1u << f.index;
        cell_masks.push_back(m);
    }
    std::vector<std::uint64_t> by_size(25, 0);
    for (std::uint32_t P = 0; P < (1u << 24); ++P) {
        bool closed = true;
        for (auto m : cell_masks) closed = closed && std::popcount(P & m) % 2 == 0;
        if (closed) ++by_size[std::popcount(P)];
    }
    auto z2 = rep_by_id("z2-sign");
    EnumerationRequest req;
    req.ngamma = false;
    const auto dos = enumerate_gauge_fixed(cx, *z2, bfs_tree(cx, {0, 0, 0, 0}), req);
    for (std::size_t k = 0; k < by_size.size(); ++k) EXPECT_EQ(by_size[k], dos.count[k]);
    // Spot-check Phi through the restricted search on a few closed supports.
    const PlaquetteSet V = minimal_vortex(cx, edge_at(cx, {0, 0, 0, 0}, 1));
    EXPECT_NEAR(phi_of_set(cx, *z2, 0.8, V).phi, std::exp(-0.8 * 2 * 3), 1e-15);
}

TEST(Phi, EmptyMinimalAndSmallSets) {
    const auto& cx = cube3();
    for (const char* id : {"z2-sign", "z3-k1", "s3-std2", "q8-2d"}) {
        SCOPED_TRACE(id);
        auto rep = rep_by_id(id);
        EXPECT_EQ(phi_of_set(cx, *rep, 0.9, {}).phi, 1.0);
        EXPECT_EQ(phi_of_set(cx, *rep, 0.9, {}).configs, 1u);
        const auto e = edge_at(cx, {1, 1, 1, 0}, 4);
        ASSERT_TRUE(is_bulk_edge(cx, e));
        for (double beta : {0.3, 1.0, 2.0}) {
            const auto phi = phi_of_set(cx, *rep, beta, minimal_vortex(cx, e));
            EXPECT_NEAR(phi.phi, r_beta(*rep, beta), 1e-12 * r_beta(*rep, beta));
            EXPECT_EQ(phi.configs, static_cast<std::uint64_t>(rep->group().order() - 1));
        }
    }
    // Random interior sets of size <= 5 carry no configuration.
    std::mt19937_64 rng(22);
    const auto interior = interior_plaquettes(cx);
    ASSERT_EQ(interior.size(), 24u);
    auto z3 = rep_by_id("z3-k1");
    for (int t = 0; t < 200; ++t) {
        std::vector<std::size_t> pool = interior;
        std::shuffle(pool.begin(), pool.end(), rng);
        PlaquetteSet P(pool.begin(), pool.begin() + 1 + t % 5);
        std::sort(P.begin(), P.end());
        EXPECT_EQ(phi_of_set(cx, *z3, 1.0, P).configs, 0u);
    }
}

TEST(Phi, QFormsAgreeWithGaugeFixedSums) {
    std::mt19937_64 rng(23);
    const auto& cx = cube3();
    for (const char* id : {"z2-sign", "z3-k1", "z4-k1"}) {
        SCOPED_TRACE(id);
        auto rep = rep_by_id(id);
        const auto& g = rep->group();
        std::uniform_int_distribution<Elem> pick(0, g.order() - 1);
        std::uniform_int_distribution<std::size_t> edge(0, cx.count(1) - 1);
        for (int t = 0; t < 12; ++t) {
            EdgeConfig sigma = identity_config(cx);
            for (int k = 0; k < 1 + t % 3; ++k) sigma[edge(rng)] = pick(rng);
            const auto P = support(cx, g, sigma);
            if (P.size() > 14) continue;
            const auto loop = random_loop(cx.region(), 10, rng);
            const IntForm S = surface_fill(cx, loop);
            const double beta = 0.4 + 0.1 * t;
            const auto q = phi_qforms(cx, *rep, beta, P, &S);
            const auto s = phi_of_set(cx, *rep, beta, P, {loop});
            EXPECT_EQ(q.forms, s.configs);
            EXPECT_NEAR(q.phi, s.phi, 1e-12 * s.phi);
            EXPECT_LE(std::abs(q.phi_s - s.phi_gamma[0]), 1e-12 * s.phi);
        }
    }
    EXPECT_THROW(phi_qforms(cx, *rep_by_id("s3-std2"), 1.0, {0}), LgtError);
}

TEST(Factorization, HypothesisGatedResiduals) {
    const auto& cx = cube3();
    auto z3 = rep_by_id("z3-k1");
    auto s3 = rep_by_id("s3-std2");
    const auto e = edge_at(cx, {1, 1, 0, 1}, 3);
    const auto V = minimal_vortex(cx, e);
    // A corner vortex far from P(e).
    const auto corner = minimal_vortex(cx, edge_at(cx, {0, 0, 0, 0}, 1));
    const auto corner2 = minimal_vortex(cx, edge_at(cx, {2, 2, 2, 1}, 4));
    ASSERT_TRUE(compatible(cx, V, corner2));
    for (double beta : {0.5, 1.5}) {
        auto r = factorization_check(cx, *z3, beta, V, corner2, FactorizationMode::MinimalVortex);
        EXPECT_LE(r.residual, 1e-9);
        EXPECT_GT(r.phi12, 0.0);
        r = factorization_check(cx, *s3, beta, V, corner2, FactorizationMode::MinimalVortex);
        EXPECT_LE(r.residual, 1e-9);
        r = factorization_check(cx, *z3, beta, corner, corner2, FactorizationMode::AbelianCompatible);
        EXPECT_LE(r.residual, 1e-9);
    }
    const auto well = find_separating_cube(cx, corner, corner2);
    if (well) {
        const auto r = factorization_check(cx, *s3, 1.0, corner, corner2, FactorizationMode::WellSeparated);
        EXPECT_LE(r.residual, 1e-9);
    }
    const auto touching = minimal_vortex(cx, edge_at(cx, {1, 1, 0, 1}, 1));
    EXPECT_THROW(factorization_check(cx, *z3, 1.0, V, touching, FactorizationMode::MinimalVortex), LgtError);
    EXPECT_THROW(factorization_check(cx, *s3, 1.0, corner, corner2, FactorizationMode::AbelianCompatible), LgtError);
    EXPECT_THROW(factorization_mode_from_string("bogus"), LgtError);
}

TEST(AbelianConditional, MinimalVortexValues) {
    const auto& cx = cube3();
    auto z3 = rep_by_id("z3-k1");
    const auto e = edge_at(cx, {1, 1, 1, 0}, 4);
    const auto V = minimal_vortex(cx, e);
    const Loop through({1, 1, 1, 0}, {4, 1, -4, -1});
    const Loop away({0, 0, 0, 0}, {1, 2, -1, -2});
    const auto through_edges = through.edges(cx);
    ASSERT_TRUE(std::any_of(through_edges.begin(), through_edges.end(),
                            [&](const DirectedEdge& de) { return de.edge == e; }));
    for (double beta : {0.4, 1.0, 3.0}) {
        const auto a = a_beta(*z3, beta);
        EXPECT_LE(std::abs(abelian_conditional(cx, *z3, beta, V, away) - Complex(1.0, 0.0)), 1e-12);
        const Complex c = abelian_conditional(cx, *z3, beta, V, through);
        EXPECT_NEAR(c.real(), a.matrix(0, 0).real(), 1e-12);
        EXPECT_NEAR(c.imag(), 0.0, 1e-12);
        EXPECT_NEAR(c.real(), -0.5, 1e-12);
    }
    try {
        abelian_conditional(cx, *z3, 1.0, {V.front()}, away);
        FAIL() << "expected a conditioning error";
    } catch (const LgtError& err) {
        EXPECT_EQ(err.kind(), ErrorKind::ConditioningOnNull);
    }
}

TEST(VortexEvents, ProbabilitiesAndReducedCorrelations) {
    const auto& cx = tess();
    EXPECT_EQ(vortex_event_prob(cx, *rep_by_id("z2-sign"), 1.0, {}), 1.0);
    const auto V = minimal_vortex(cx, edge_at(cx, {0, 0, 0, 0}, 1));
    const auto W = minimal_vortex(cx, edge_at(cx, {0, 1, 1, 1}, 1));
    const auto U = minimal_vortex(cx, edge_at(cx, {1, 0, 0, 0}, 2));
    ASSERT_TRUE(compatible(cx, V, W));
    ASSERT_FALSE(compatible(cx, V, U));
    // P(all V_i appear, no listed V' appears) = prod Phi(V_i) * rho(N(V_i), V').
    const std::vector<VortexEvent> events{
        {{V}, {}, {}},     {{}, {}, {V}},       {{V, W}, {}, {}}, {{}, {}, {V, W}},
        {{V}, {U}, {}},    {{}, {U}, {V}},      {{W}, {U}, {}},   {{}, {U}, {W}},
    };
    for (const char* id : {"z2-sign", "z3-k1"}) {
        SCOPED_TRACE(id);
        auto rep = rep_by_id(id);
        EnumerationRequest req;
        req.ngamma = false;
        req.events = events;
        const auto dos = enumerate_gauge_fixed(cx, *rep, bfs_tree(cx, {0, 0, 0, 0}), req);
        for (double beta : {0.5, 1.0, 2.0}) {
            const double zV = phi_of_set(cx, *rep, beta, V).phi;
            const double zW = phi_of_set(cx, *rep, beta, W).phi;
            std::vector<double> p;
            for (std::size_t k = 0; k < events.size(); ++k) p.push_back(dos.event_probability(k, beta));
            EXPECT_LE(p[0], zV);
            EXPECT_LE(p[2], zV * zW);
            EXPECT_NEAR(p[0], zV * p[1], 1e-12 * p[0]);
            EXPECT_NEAR(p[2], zV * zW * p[3], 1e-12 * p[2]);
            EXPECT_NEAR(p[4], zV * p[5], 1e-12 * p[0]);
            EXPECT_NEAR(p[6], zW * p[7], 1e-12 * p[6]);
        }
    }
    // The convenience entry points run the same events.
    auto z2 = rep_by_id("z2-sign");
    EnumerationRequest req;
    req.ngamma = false;
    req.events = {events[2], events[3]};
    const auto dos = enumerate_gauge_fixed(cx, *z2, bfs_tree(cx, {0, 0, 0, 0}), req);
    EXPECT_NEAR(vortex_event_prob(cx, *z2, 0.7, events[2]), dos.event_probability(0, 0.7), 1e-14);
    EXPECT_NEAR(reduced_correlation(cx, *z2, 0.7, {V, W}, {}), dos.event_probability(1, 0.7), 1e-14);
    EXPECT_EQ(vortex_event_prob(cx, *z2, 1.0, {{V, U}, {}, {}}), 0.0);
    EXPECT_THROW(vortex_event_prob(cx, *z2, 1.0, {{unite(V, W)}, {}, {}}), LgtError);
}

TEST(VortexEvents, CompatibleMinimalVorticesDecorrelate) {
    const auto& cx = tess();
    auto z2 = rep_by_id("z2-sign");
    const auto V = minimal_vortex(cx, edge_at(cx, {0, 0, 0, 0}, 1));
    const auto W = minimal_vortex(cx, edge_at(cx, {0, 1, 1, 1}, 1));
    EnumerationRequest req;
    req.ngamma = false;
    req.events = {{{V, W}, {}, {}}, {{V}, {}, {}}, {{W}, {}, {}}};
    const auto dos = enumerate_gauge_fixed(cx, *z2, bfs_tree(cx, {0, 0, 0, 0}), req);
    double previous = 1.0;
    for (double beta : {1.0, 2.0, 3.0, 4.0}) {
        const double ratio =
            dos.event_probability(0, beta) / (dos.event_probability(1, beta) * dos.event_probability(2, beta));
        const double gap = std::abs(ratio - 1.0);
        EXPECT_LT(gap, previous) << "beta=" << beta;
        previous = gap;
    }
    EXPECT_LT(previous, 1e-5);
}
