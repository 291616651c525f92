#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "lgt/catalog.hpp"
#include "lgt/sampler.hpp"

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

EdgeConfig random_config(const CellComplex& cx, int order, std::mt19937_64& rng) {
    std::uniform_int_distribution<Elem> pick(0, order - 1);
    EdgeConfig s(cx.count(1));
    for (auto& v : s) v = pick(rng);
    return s;
}

SamplerParams quick(std::size_t samples, std::uint64_t seed) {
    SamplerParams p;
    p.samples = samples;
    p.burnin = 200;
    p.thin = 2;
    p.seed = seed;
    return p;
}

}  // namespace

TEST(CounterRng, DeterministicAndUniform) {
    EXPECT_EQ(counter_hash(1, 2, 3, 4), counter_hash(1, 2, 3, 4));
    EXPECT_NE(counter_hash(1, 2, 3, 4), counter_hash(1, 2, 4, 3));
    EXPECT_NE(counter_hash(1, 2, 3, 4), counter_hash(2, 2, 3, 4));
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = counter_uniform(9, 0, static_cast<std::uint64_t>(i), 0);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
}

TEST(HeatBath, ConditionalMatchesGlobalWeights) {
    std::mt19937_64 rng(31);
    for (const char* id : {"z2-sign", "z3-k1", "s3-std2", "q8-2d"}) {
        SCOPED_TRACE(id);
        auto rep = rep_by_id(id);
        const int n = rep->group().order();
        for (const auto* cx : {&tess(), &cube3()}) {
            for (int t = 0; t < 10; ++t) {
                const auto start = random_config(*cx, n, rng);
                const double beta = 0.2 + 0.3 * t;
                Chain chain(*cx, *rep, beta, 1, start);
                const std::size_t e = rng() % cx->count(1);
                const auto w = chain.conditional(e);
                std::vector<double> logw;
                for (Elem g = 0; g < n; ++g) {
                    auto s = start;
                    s[e] = g;
                    logw.push_back(-beta * action(*cx, *rep, s));
                }
                const double hi = *std::max_element(logw.begin(), logw.end());
                double total = 0.0;
                for (double v : logw) total += std::exp(v - hi);
                double sum = 0.0;
                for (Elem g = 0; g < n; ++g) {
                    EXPECT_NEAR(w[g], std::exp(logw[g] - hi) / total, 1e-12);
                    sum += w[g];
                }
                EXPECT_NEAR(sum, 1.0, 1e-12);
            }
        }
    }
}

TEST(HeatBath, ZeroBetaIsUniformAndZ2OddsAreExact) {
    auto z2 = rep_by_id("z2-sign");
    const auto& cx = cube3();
    auto s3 = rep_by_id("s3-std2");
    Chain flat(cx, *s3, 0.0, 5);
    for (double v : flat.conditional(17)) EXPECT_DOUBLE_EQ(v, 1.0 / 6);
    // A bulk edge in the identity configuration: flipping it excites 6 plaquettes, each
    // with gap 2, so the odds are exp(-12 beta).
    std::size_t bulk = 0;
    while (cx.edge_plaquettes(bulk).size() != 6) ++bulk;
    for (double beta : {0.1, 0.5, 1.5}) {
        Chain chain(cx, *z2, beta, 5);
        const auto w = chain.conditional(bulk);
        EXPECT_NEAR(w[1] / w[0], std::exp(-12 * beta), 1e-14);
    }
}

TEST(HeatBath, DetailedBalanceOnSingleCell) {
    // pi(s) T(s -> s') = pi(s') T(s' -> s) for every edge and every pair of values,
    // over every seventh gauge-fixed starting point.
    const auto& cx = tess();
    auto z2 = rep_by_id("z2-sign");
    const auto tree = bfs_tree(cx, {0, 0, 0, 0});
    std::vector<std::size_t> free_edges;
    for (std::size_t e = 0; e < cx.count(1); ++e)
        if (!tree.in_tree[e]) free_edges.push_back(e);
    ASSERT_EQ(free_edges.size(), 17u);
    const double beta = 0.7;
    double worst = 0.0;
    EdgeConfig s = identity_config(cx);
    for (std::uint32_t m = 0; m < (1u << 17); m += 7) {
        for (std::size_t i = 0; i < 17; ++i) s[free_edges[i]] = static_cast<Elem>((m >> i) & 1);
        const std::size_t e = m % cx.count(1);
        Chain a(cx, *z2, beta, 1, s);
        auto flipped = s;
        flipped[e] ^= 1;
        Chain b(cx, *z2, beta, 1, flipped);
        const double la = -beta * action(cx, *z2, s), lb = -beta * action(cx, *z2, flipped);
        const double lhs = la + std::log(a.conditional(e)[flipped[e]]);
        const double rhs = lb + std::log(b.conditional(e)[s[e]]);
        worst = std::max(worst, std::abs(std::expm1(lhs - rhs)));
    }
    EXPECT_LE(worst, 1e-12);
}

TEST(Metropolis, ZeroBetaAndSelfProposalsAlwaysAccept) {
    auto s3 = rep_by_id("s3-std2");
    Chain chain(cube3(), *s3, 0.0, 11);
    for (int i = 0; i < 5; ++i) chain.sweep(Algorithm::Metropolis, Schedule::Sequential);
    EXPECT_EQ(chain.accepted(), chain.proposals());
    EXPECT_EQ(chain.proposals(), 5 * cube3().count(1));
    // At large beta the only accepted moves from the identity are self-proposals.
    auto z2 = rep_by_id("z2-sign");
    Chain cold(cube3(), *z2, 50.0, 12);
    cold.sweep(Algorithm::Metropolis, Schedule::Sequential);
    EXPECT_EQ(cold.config(), identity_config(cube3()));
    EXPECT_GT(cold.accepted(), 0u);
}

TEST(Sweep, CheckerboardClassesAreInterferenceFree) {
    for (const auto* cx : {&tess(), &cube3()}) {
        const auto classes = checkerboard_classes(*cx);
        std::vector<int> seen(cx->count(1), 0);
        for (const auto& cls : classes) {
            std::set<std::size_t> plaquettes;
            for (std::size_t e : cls) {
                ++seen[e];
                for (std::size_t p : cx->edge_plaquettes(e)) EXPECT_TRUE(plaquettes.insert(p).second);
            }
        }
        for (int c : seen) EXPECT_EQ(c, 1);
    }
}

TEST(Sweep, ReproducibleAndOrderFreeWithinClasses) {
    auto z3 = rep_by_id("z3-k1");
    const auto& cx = cube3();
    Chain a(cx, *z3, 0.8, 77), b(cx, *z3, 0.8, 77), c(cx, *z3, 0.8, 78);
    for (int i = 0; i < 5; ++i) {
        a.sweep(Algorithm::HeatBath, Schedule::Checkerboard);
        b.sweep(Algorithm::HeatBath, Schedule::Checkerboard);
        c.sweep(Algorithm::HeatBath, Schedule::Checkerboard);
    }
    EXPECT_EQ(a.config(), b.config());
    EXPECT_NE(a.config(), c.config());
    EXPECT_EQ(a.sweeps_done(), 5u);

    // Updating a class in reverse order gives the same state: members share no plaquette
    // and draws are keyed by edge.
    Chain fwd(cx, *z3, 0.8, 3), rev(cx, *z3, 0.8, 3);
    for (const auto& cls : checkerboard_classes(cx)) {
        for (std::size_t e : cls) fwd.update(e, Algorithm::HeatBath);
        for (auto it = cls.rbegin(); it != cls.rend(); ++it) rev.update(*it, Algorithm::HeatBath);
        EXPECT_EQ(fwd.config(), rev.config());
    }
}

TEST(BatchMeans, IidErrorAndPreconditions) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(2.0, 1.0);
    std::vector<double> xs(40000);
    for (auto& x : xs) x = gauss(rng);
    const auto b = batch_means(xs);
    EXPECT_NEAR(b.mean, 2.0, 0.03);
    EXPECT_NEAR(b.stderr_, 1.0 / std::sqrt(40000.0), 0.5 / std::sqrt(40000.0));
    EXPECT_GT(b.ess, 10000.0);
    EXPECT_THROW(batch_means(xs, 10), LgtError);
    EXPECT_THROW(batch_means(std::vector<double>(5, 1.0)), LgtError);
    const auto flat = batch_means(std::vector<double>(100, 1.0));
    EXPECT_EQ(flat.stderr_, 0.0);
    EXPECT_EQ(flat.ess, 100.0);
}

TEST(Measurement, WilsonAgreesWithExactOracle) {
    const auto& cx = tess();
    auto z2 = rep_by_id("z2-sign");
    const auto loop = Loop::rectangle(1, 1, 1, 2, {0, 0, 0, 0});
    const double beta = 0.3;
    const double exact = wilson_exact(cx, *z2, beta, loop).real();
    int k = 0;
    for (auto algo : {Algorithm::HeatBath, Algorithm::Metropolis})
        for (auto sched : {Schedule::Sequential, Schedule::Checkerboard}) {
            auto p = quick(20000, 100 + static_cast<std::uint64_t>(k++));
            p.algo = algo;
            p.schedule = sched;
            const auto rec = measure_wilson(cx, *z2, beta, loop, p);
            EXPECT_EQ(rec.samples, 20000u);
            EXPECT_NEAR(rec.mean.real(), exact, 3 * rec.stderr_) << k;
            EXPECT_EQ(rec.mean.imag(), 0.0);
            EXPECT_GT(rec.ess, 100.0);
        }
}

TEST(Measurement, LimitsOfBeta) {
    const auto& cx = cube3();
    const auto loop = Loop::rectangle(1, 1, 1, 2, {0, 1, 0, 1});
    auto z2 = rep_by_id("z2-sign");
    const auto hot = measure_wilson(cx, *z2, 0.0, loop, quick(4000, 7));
    EXPECT_NEAR(hot.mean.real(), 0.0, 3 * hot.stderr_);
    auto z3 = rep_by_id("z3-k1");
    const auto hot3 = measure_wilson(cx, *z3, 0.0, loop, quick(4000, 8));
    EXPECT_NEAR(hot3.mean.real(), 0.0, 3 * hot3.stderr_);
    const auto cold = measure_wilson(cx, *z2, 10.0, loop, quick(200, 9));
    EXPECT_NEAR(cold.mean.real(), 1.0 - 2 * 4 * std::exp(-12 * 10.0), 1e-9);
    const auto ng = measure_ngamma(cx, *z2, 10.0, loop, quick(200, 9));
    ASSERT_EQ(ng.histogram.size(), loop.length() + 1);
    EXPECT_EQ(ng.histogram[0], 1.0);
}

TEST(Measurement, NgammaHistogramAgreesWithExactPmf) {
    const auto& cx = tess();
    const auto loop = Loop::rectangle(1, 1, 1, 2, {0, 0, 0, 0});
    for (const char* id : {"z2-sign", "z3-k1"}) {
        SCOPED_TRACE(id);
        auto rep = rep_by_id(id);
        const double beta = 0.6;
        const auto pmf = ngamma_pmf_exact(cx, *rep, beta, loop);
        const auto rec = measure_ngamma(cx, *rep, beta, loop, quick(20000, 41));
        ASSERT_EQ(rec.histogram.size(), pmf.size());
        double total = 0.0;
        for (std::size_t n = 0; n < pmf.size(); ++n) {
            const double band = 3 * std::max(rec.histogram_se[n], std::sqrt(pmf[n] * (1 - pmf[n]) / 20000.0));
            EXPECT_NEAR(rec.histogram[n], pmf[n], band) << "n=" << n;
            total += rec.histogram[n];
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(Measurement, EventFrequencyAndChainsAreDeterministic) {
    const auto& cx = tess();
    auto z2 = rep_by_id("z2-sign");
    const auto V = minimal_vortex(cx, *cx.find({0, 0, 0, 0}, 1));
    MeasurementPlan plan;
    plan.loops = {Loop::rectangle(1, 1, 1, 2, {0, 0, 0, 0})};
    plan.events = {{{V}, {}, {}}};
    const double beta = 0.5;
    auto p = quick(20000, 55);
    p.chains = 3;
    p.samples = 8000;
    const auto one = run_mc(cx, *z2, beta, plan, p);
    p.jobs = 3;
    const auto three = run_mc(cx, *z2, beta, plan, p);
    EXPECT_EQ(one.wilson[0].mean, three.wilson[0].mean);
    EXPECT_EQ(one.ngamma[0].histogram, three.ngamma[0].histogram);
    EXPECT_EQ(one.events[0].mean, three.events[0].mean);
    EXPECT_EQ(one.events[0].samples, 24000u);
    const double exact = vortex_event_prob(cx, *z2, beta, plan.events[0]);
    EXPECT_NEAR(one.events[0].mean.real(), exact, 3 * std::max(one.events[0].stderr_, std::sqrt(exact * (1 - exact) / 24000)));
}

TEST(Measurement, RejectsBadInput) {
    auto z2 = rep_by_id("z2-sign");
    EXPECT_THROW(Chain(tess(), *z2, -1.0, 1), LgtError);
    EXPECT_THROW(Chain(tess(), *z2, 1.0, 1, EdgeConfig(3, 0)), LgtError);
    const Loop open({0, 0, 0, 0}, {1, 2});
    EXPECT_THROW(measure_wilson(tess(), *z2, 1.0, open, quick(100, 1)), LgtError);
    EXPECT_THROW(measure_wilson(tess(), *z2, 1.0, Loop::rectangle(1, 1, 1, 2, {0, 0, 0, 0}), quick(10, 1)), LgtError);
    EXPECT_THROW(algorithm_from_string("gibbs"), LgtError);
    EXPECT_THROW(schedule_from_string("random"), LgtError);
}
