#include "lgt/sampler.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

namespace lgt {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t sweep, std::uint64_t edge, std::uint64_t slot) {
    std::uint64_t h = splitmix(seed);
    h = splitmix(h ^ sweep);
    h = splitmix(h ^ edge);
    return splitmix(h ^ slot);
}

double counter_uniform(std::uint64_t seed, std::uint64_t sweep, std::uint64_t edge, std::uint64_t slot) {
    return static_cast<double>(counter_hash(seed, sweep, edge, slot) >> 11) * 0x1.0p-53;
}

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "heatbath" || s == "heat-bath") return Algorithm::HeatBath;
    if (s == "metropolis") return Algorithm::Metropolis;
    throw LgtError(ErrorKind::Config, "unknown sampler algorithm '" + s + "'");
}

Schedule schedule_from_string(const std::string& s) {
    if (s == "sequential") return Schedule::Sequential;
    if (s == "checkerboard") return Schedule::Checkerboard;
    throw LgtError(ErrorKind::Config, "unknown sweep schedule '" + s + "'");
}

std::vector<std::vector<std::size_t>> checkerboard_classes(const CellComplex& cx) {
    // Parallel edges on a common plaquette differ by one unit step, so the coordinate
    // parity splits them; edges of different directions land in different classes anyway.
    std::vector<std::vector<std::size_t>> classes(8);
    for (std::size_t e = 0; e < cx.count(1); ++e) {
        const auto& c = cx.cell(1, e);
        int parity = 0;
        for (int k = 0; k < 4; ++k) parity += c.base[k];
        classes[static_cast<std::size_t>(cx.edge_direction(e) * 2 + (parity & 1))].push_back(e);
    }
    classes.erase(std::remove_if(classes.begin(), classes.end(), [](const auto& v) { return v.empty(); }),
                  classes.end());
    return classes;
}

Chain::Chain(const CellComplex& cx, const UnitaryRep& rep, double beta, std::uint64_t seed)
    : Chain(cx, rep, beta, seed, identity_config(cx)) {}

Chain::Chain(const CellComplex& cx, const UnitaryRep& rep, double beta, std::uint64_t seed, EdgeConfig start)
    : cx_(&cx), rep_(&rep), beta_(beta), seed_(seed), sigma_(std::move(start)) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw LgtError(ErrorKind::Precondition, "beta must be finite and >= 0");
    if (sigma_.size() != cx.count(1)) throw LgtError(ErrorKind::Precondition, "configuration size mismatch");
    for (Elem g : sigma_)
        if (g < 0 || g >= rep.group().order()) throw LgtError(ErrorKind::Precondition, "element out of range");
    classes_ = checkerboard_classes(cx);
}

std::vector<double> Chain::local_action(std::size_t e) const {
    const auto& g = rep_->group();
    std::vector<double> s(static_cast<std::size_t>(g.order()), 0.0);
    for (std::size_t p : cx_->edge_plaquettes(e)) {
        const auto& pe = cx_->plaquette_edges(p);
        int k = 0;
        while (pe[k].edge != e) ++k;
        // Cyclic rotation keeps the conjugacy class: the holonomy is conjugate to g^o * rest.
        Elem rest = 0;
        for (int j = 1; j < 4; ++j) {
            const auto& x = pe[(k + j) % 4];
            rest = g.mul(rest, x.orientation > 0 ? sigma_[x.edge] : g.inv(sigma_[x.edge]));
        }
        const int o = pe[k].orientation;
        for (Elem h = 0; h < g.order(); ++h) s[h] += rep_->gap(g.mul(o > 0 ? h : g.inv(h), rest));
    }
    return s;
}

std::vector<double> Chain::conditional(std::size_t e) const {
    auto s = local_action(e);
    const double lo = *std::min_element(s.begin(), s.end());
    double total = 0.0;
    for (double& v : s) total += (v = std::exp(-beta_ * (v - lo)));
    for (double& v : s) v /= total;
    return s;
}

void Chain::heatbath_update(std::size_t e) {
    const auto w = conditional(e);
#ifndef NDEBUG
    assert(std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) <= 1e-12);
#endif
    const double u = counter_uniform(seed_, sweeps_, e, 0);
    double acc = 0.0;
    Elem pick = static_cast<Elem>(w.size()) - 1;
    for (std::size_t h = 0; h < w.size(); ++h) {
        acc += w[h];
        if (u < acc) {
            pick = static_cast<Elem>(h);
            break;
        }
    }
    // Round-off can leave acc a hair under 1; the last element with positive weight takes it.
    while (pick > 0 && w[pick] == 0.0) --pick;
    ++proposals_;
    if (pick != sigma_[e]) ++accepted_;
    sigma_[e] = pick;
}

void Chain::metropolis_update(std::size_t e) {
    const int n = rep_->group().order();
    const Elem proposal = static_cast<Elem>(counter_hash(seed_, sweeps_, e, 1) % static_cast<std::uint64_t>(n));
    ++proposals_;
    if (proposal == sigma_[e]) {
        ++accepted_;
        return;
    }
    const auto s = local_action(e);
    const double delta = s[proposal] - s[sigma_[e]];
    if (delta <= 0.0 || counter_uniform(seed_, sweeps_, e, 2) < std::exp(-beta_ * delta)) {
        sigma_[e] = proposal;
        ++accepted_;
    }
}

void Chain::update(std::size_t e, Algorithm algo) {
    if (e >= sigma_.size()) throw LgtError(ErrorKind::Precondition, "edge not in region");
    if (algo == Algorithm::HeatBath)
        heatbath_update(e);
    else
        metropolis_update(e);
}

void Chain::sweep(Algorithm algo, Schedule schedule) {
    if (schedule == Schedule::Sequential) {
        for (std::size_t e = 0; e < sigma_.size(); ++e) update(e, algo);
    } else {
        for (const auto& cls : classes_)
            for (std::size_t e : cls) update(e, algo);
    }
    ++sweeps_;
}

BatchEstimate batch_means(const std::vector<std::vector<double>>& chains, std::size_t batches) {
    if (batches < 20) throw LgtError(ErrorKind::Precondition, "batch means needs at least 20 batches");
    BatchEstimate out;
    std::vector<double> means;
    double sum = 0.0, sumsq = 0.0;
    std::size_t n = 0;
    for (const auto& xs : chains) {
        const std::size_t size = xs.size() / batches;
        if (size == 0) throw LgtError(ErrorKind::Precondition, "fewer samples than batches");
        for (std::size_t b = 0; b < batches; ++b) {
            double s = 0.0;
            for (std::size_t i = b * size; i < (b + 1) * size; ++i) {
                s += xs[i];
                sumsq += xs[i] * xs[i];
            }
            sum += s;
            n += size;
            means.push_back(s / static_cast<double>(size));
        }
    }
    out.mean = sum / static_cast<double>(n);
    double v = 0.0;
    for (double m : means) v += (m - out.mean) * (m - out.mean);
    v /= static_cast<double>(means.size() - 1);
    out.stderr_ = std::sqrt(v / static_cast<double>(means.size()));
    const double var = std::max(0.0, sumsq / static_cast<double>(n) - out.mean * out.mean);
    out.ess = out.stderr_ > 0.0 ? std::min(static_cast<double>(n), var / (out.stderr_ * out.stderr_))
                                : static_cast<double>(n);
    return out;
}

BatchEstimate batch_means(const std::vector<double>& xs, std::size_t batches) {
    return batch_means(std::vector<std::vector<double>>{xs}, batches);
}

bool event_holds(const CellComplex& cx, const VortexEvent& ev, const std::vector<char>& in_support) {
    auto is_part = [&](const PlaquetteSet& V) {
        for (std::size_t p : V)
            if (!in_support[p]) return false;
        for (std::size_t p : V)
            for (std::size_t q : cx.plaquette_neighbors(p))
                if (in_support[q] && !std::binary_search(V.begin(), V.end(), q)) return false;
        return true;
    };
    for (const auto& V : ev.appear)
        if (!is_part(V)) return false;
    for (const auto& V : ev.absent)
        if (is_part(V)) return false;
    for (const auto& V : ev.avoid_neighborhood)
        for (std::size_t p : incompatibility_closure(cx, V))
            if (in_support[p]) return false;
    return true;
}

namespace {

struct ChainSeries {
    std::vector<std::vector<double>> wilson_re, wilson_im;
    std::vector<std::vector<std::vector<double>>> ngamma_bins;  // [loop][n][sample]
    std::vector<std::vector<double>> ngamma_value;
    std::vector<std::vector<double>> events;
    std::uint64_t proposals = 0, accepted = 0, sweeps = 0;
};

ChainSeries run_chain(const CellComplex& cx, const UnitaryRep& rep, double beta, const MeasurementPlan& plan,
                      const SamplerParams& params, std::uint64_t seed,
                      const std::vector<NGammaCounter>& counters) {
    const auto& g = rep.group();
    Chain chain(cx, rep, beta, seed);
    ChainSeries out;
    const std::size_t nl = plan.loops.size();
    out.wilson_re.assign(nl, {});
    out.wilson_im.assign(nl, {});
    out.ngamma_value.assign(nl, {});
    out.ngamma_bins.resize(nl);
    for (std::size_t l = 0; l < nl; ++l)
        out.ngamma_bins[l].assign(plan.ngamma ? counters[l].length() + 1 : 0, {});
    out.events.assign(plan.events.size(), {});

    for (std::size_t i = 0; i < params.burnin; ++i) chain.sweep(params.algo, params.schedule);
    std::vector<char> mask(cx.count(2), 0);
    const bool need_support = plan.ngamma || !plan.events.empty();
    for (std::size_t s = 0; s < params.samples; ++s) {
        for (std::size_t i = 0; i < std::max<std::size_t>(params.thin, 1); ++i) chain.sweep(params.algo, params.schedule);
        const auto& sigma = chain.config();
        if (need_support)
            for (std::size_t p = 0; p < mask.size(); ++p) mask[p] = plaquette_holonomy(cx, g, sigma, p) != 0;
        for (std::size_t l = 0; l < nl; ++l) {
            const Complex w = wilson_loop(cx, rep, sigma, plan.loops[l]);
            out.wilson_re[l].push_back(w.real());
            out.wilson_im[l].push_back(w.imag());
            if (plan.ngamma) {
                const std::size_t n = counters[l].count([&](std::size_t p) { return mask[p] != 0; });
                out.ngamma_value[l].push_back(static_cast<double>(n));
                for (std::size_t k = 0; k < out.ngamma_bins[l].size(); ++k)
                    out.ngamma_bins[l][k].push_back(k == n ? 1.0 : 0.0);
            }
        }
        for (std::size_t k = 0; k < plan.events.size(); ++k)
            out.events[k].push_back(event_holds(cx, plan.events[k], mask) ? 1.0 : 0.0);
    }
    out.proposals = chain.proposals();
    out.accepted = chain.accepted();
    out.sweeps = chain.sweeps_done();
    return out;
}

template <class Pick>
std::vector<std::vector<double>> gather(const std::vector<ChainSeries>& runs, Pick pick) {
    std::vector<std::vector<double>> out;
    for (const auto& r : runs) out.push_back(pick(r));
    return out;
}

}  // namespace

MCResult run_mc(const CellComplex& cx, const UnitaryRep& rep, double beta, const MeasurementPlan& plan,
                const SamplerParams& params) {
    const auto t0 = std::chrono::steady_clock::now();
    if (params.samples < 20) throw LgtError(ErrorKind::Precondition, "at least 20 samples are needed");
    if (params.chains < 1) throw LgtError(ErrorKind::Precondition, "at least one chain is needed");
    for (const auto& loop : plan.loops) {
        if (!loop.is_closed() || !loop.is_self_avoiding())
            throw LgtError(ErrorKind::Precondition, "loop must be closed and self-avoiding");
        loop.edges(cx);  // throws when the loop leaves the region
    }
    for (const auto& ev : plan.events)
        for (const auto* list : {&ev.appear, &ev.absent, &ev.avoid_neighborhood})
            for (const auto& V : *list)
                if (!is_vortex(cx, V)) throw LgtError(ErrorKind::Precondition, "event sets must be vortices");
    std::vector<NGammaCounter> counters;
    if (plan.ngamma)
        for (const auto& loop : plan.loops) counters.emplace_back(cx, loop);

    std::vector<ChainSeries> runs(params.chains);
    auto seed_of = [&](std::size_t c) { return c == 0 ? params.seed : counter_hash(params.seed, 0, c, 0x636861696eULL); };
    const unsigned jobs = std::max(1u, std::min<unsigned>(params.jobs, static_cast<unsigned>(params.chains)));
    if (jobs == 1) {
        for (std::size_t c = 0; c < params.chains; ++c) runs[c] = run_chain(cx, rep, beta, plan, params, seed_of(c), counters);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(jobs);
        for (unsigned j = 0; j < jobs; ++j)
            pool.emplace_back([&, j] {
                try {
                    for (std::size_t c = j; c < params.chains; c += jobs)
                        runs[c] = run_chain(cx, rep, beta, plan, params, seed_of(c), counters);
                } catch (...) {
                    errors[j] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    MCResult res;
    std::uint64_t prop = 0, acc = 0;
    for (const auto& r : runs) {
        prop += r.proposals;
        acc += r.accepted;
        res.sweeps += r.sweeps;
    }
    res.acceptance = prop ? static_cast<double>(acc) / static_cast<double>(prop) : 1.0;
    const std::size_t n = params.samples * params.chains;
    for (std::size_t l = 0; l < plan.loops.size(); ++l) {
        const auto re = batch_means(gather(runs, [&](const ChainSeries& r) { return r.wilson_re[l]; }));
        const auto im = batch_means(gather(runs, [&](const ChainSeries& r) { return r.wilson_im[l]; }));
        MeasurementRecord w;
        w.observable = "wilson";
        w.samples = n;
        w.mean = {re.mean, im.mean};
        w.stderr_ = re.stderr_;
        w.ess = re.ess;
        res.wilson.push_back(std::move(w));
        if (plan.ngamma) {
            const auto v = batch_means(gather(runs, [&](const ChainSeries& r) { return r.ngamma_value[l]; }));
            MeasurementRecord m;
            m.observable = "ngamma";
            m.samples = n;
            m.mean = {v.mean, 0.0};
            m.stderr_ = v.stderr_;
            m.ess = v.ess;
            for (std::size_t k = 0; k < runs[0].ngamma_bins[l].size(); ++k) {
                const auto b = batch_means(gather(runs, [&](const ChainSeries& r) { return r.ngamma_bins[l][k]; }));
                m.histogram.push_back(b.mean);
                m.histogram_se.push_back(b.stderr_);
            }
            res.ngamma.push_back(std::move(m));
        }
    }
    for (std::size_t k = 0; k < plan.events.size(); ++k) {
        const auto b = batch_means(gather(runs, [&](const ChainSeries& r) { return r.events[k]; }));
        MeasurementRecord m;
        m.observable = "event";
        m.samples = n;
        m.mean = {b.mean, 0.0};
        m.stderr_ = b.stderr_;
        m.ess = b.ess;
        res.events.push_back(std::move(m));
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

MeasurementRecord measure_wilson(const CellComplex& cx, const UnitaryRep& rep, double beta, const Loop& loop,
                                 const SamplerParams& params) {
    MeasurementPlan plan;
    plan.loops = {loop};
    plan.ngamma = false;
    return run_mc(cx, rep, beta, plan, params).wilson.front();
}

MeasurementRecord measure_ngamma(const CellComplex& cx, const UnitaryRep& rep, double beta, const Loop& loop,
                                 const SamplerParams& params) {
    MeasurementPlan plan;
    plan.loops = {loop};
    return run_mc(cx, rep, beta, plan, params).ngamma.front();
}

}  // namespace lgt
