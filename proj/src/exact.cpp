#include "lgt/exact.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>

namespace lgt {

namespace {

using Clock = std::chrono::steady_clock;

struct Kahan {
    double sum = 0.0, comp = 0.0;
    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

struct KahanComplex {
    Kahan re, im;
    void add(Complex z) {
        re.add(z.real());
        im.add(z.imag());
    }
    Complex value() const { return {re.sum, im.sum}; }
};

// A set V is a whole vortex of the support iff V is inside it and nothing adjacent is.
struct PartTest {
    std::uint64_t need = 0, forbid = 0;
    bool holds(std::uint64_t mask) const { return (mask & need) == need && (mask & forbid) == 0; }
};

std::uint64_t to_mask(const PlaquetteSet& s) {
    std::uint64_t m = 0;
    for (std::size_t p : s) m |= std::uint64_t{1} << p;
    return m;
}

PartTest part_test(const CellComplex& cx, const PlaquetteSet& V) {
    const PlaquetteSet closure = incompatibility_closure(cx, V);
    return {to_mask(V), to_mask(closure) & ~to_mask(V)};
}

struct EventTest {
    std::vector<PartTest> appear, absent;
    std::uint64_t avoid = 0;
    bool holds(std::uint64_t mask) const {
        if (mask & avoid) return false;
        for (const auto& t : appear)
            if (!t.holds(mask)) return false;
        for (const auto& t : absent)
            if (t.holds(mask)) return false;
        return true;
    }
};

struct Shard {
    std::vector<std::uint64_t> count;
    std::vector<std::vector<KahanComplex>> wilson;
    std::vector<std::vector<std::uint64_t>> ngamma;
    std::vector<std::vector<std::uint64_t>> event;
    std::uint64_t visited = 0;
};

class Engine {
public:
    Engine(const CellComplex& cx, const UnitaryRep& rep, const SpanningTree& tree, const EnumerationRequest& req,
           const EnumerationBudget& budget)
        : cx_(cx), rep_(rep), g_(rep.group()), req_(req), budget_(budget), start_(Clock::now()) {
        if (!is_spanning_tree(cx, tree)) throw LgtError(ErrorKind::Precondition, "not a spanning tree");
        const std::size_t np = cx.count(2);
        restricted_ = req.restrict_support.has_value();
        if (restricted_) {
            in_support_.assign(np, 0);
            for (std::size_t p : *req.restrict_support) in_support_.at(p) = 1;
        }
        use_mask_ = np <= 64;
        if (!use_mask_ && (!req.events.empty() || (req.ngamma && !req.loops.empty())))
            throw LgtError(ErrorKind::Precondition, "support tracking needs a region with at most 64 plaquettes");

        build_levels();
        build_order(tree);
        if (!restricted_) {
            // |G|^M against the budget, saturating.
            long double need = std::pow(static_cast<long double>(g_.order()), static_cast<long double>(order_.size()));
            if (need > static_cast<long double>(budget_.max_configs))
                throw LgtError(ErrorKind::Budget, "enumeration requires " + std::to_string(g_.order()) + "^" +
                                                      std::to_string(order_.size()) + " configurations, budget is " +
                                                      std::to_string(budget_.max_configs));
        }
        for (const auto& loop : req.loops) {
            if (!loop.is_closed()) throw LgtError(ErrorKind::Precondition, "loops must be closed");
            std::vector<DirectedEdge> nt;
            std::vector<PartTest> tests;
            for (const auto& de : loop.edges(cx)) {
                if (!tree.in_tree[de.edge]) nt.push_back(de);
                if (use_mask_) tests.push_back(part_test(cx, minimal_vortex(cx, de.edge)));
            }
            loop_edges_.push_back(std::move(nt));
            loop_tests_.push_back(std::move(tests));
            loop_len_.push_back(loop.length());
        }
        for (const auto& ev : req.events) {
            EventTest t;
            for (const auto& V : ev.appear) t.appear.push_back(part_test(cx, V));
            for (const auto& V : ev.absent) t.absent.push_back(part_test(cx, V));
            for (const auto& V : ev.avoid_neighborhood) t.avoid |= to_mask(incompatibility_closure(cx, V));
            events_.push_back(std::move(t));
        }
    }

    DensityOfStates run() {
        DensityOfStates out;
        out.group_order = g_.order();
        out.vertices = cx_.count(0);
        out.level_gaps = gaps_;
        out.energy.resize(keys_);
        for (std::size_t k = 0; k < keys_; ++k) {
            std::size_t rest = k;
            double e = 0.0;
            for (double gap : gaps_) {
                e += static_cast<double>(rest % base_) * gap;
                rest /= base_;
            }
            out.energy[k] = e;
        }
        out.count.assign(keys_, 0);
        out.wilson.assign(loop_edges_.size(), std::vector<Complex>(keys_));
        out.loop_length = loop_len_;
        for (std::size_t i = 0; i < loop_edges_.size(); ++i)
            out.ngamma.emplace_back(req_.ngamma && use_mask_ ? keys_ * (loop_len_[i] + 1) : 0, 0);
        out.event.assign(events_.size(), std::vector<std::uint64_t>(keys_, 0));

        const std::size_t nshards = order_.empty() ? 1 : static_cast<std::size_t>(g_.order());
        std::vector<Shard> shards(nshards);
        if (!infeasible_) {
            const unsigned jobs = std::max(1u, std::min<unsigned>(req_.jobs, static_cast<unsigned>(nshards)));
            std::vector<std::exception_ptr> errors(jobs);
            auto work = [&](unsigned t) {
                try {
                    for (std::size_t s = t; s < nshards; s += jobs) run_shard(static_cast<Elem>(s), shards[s]);
                } catch (...) {
                    errors[t] = std::current_exception();
                    stop_ = true;
                }
            };
            if (jobs == 1) {
                work(0);
            } else {
                std::vector<std::thread> pool;
                for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(work, t);
                for (auto& th : pool) th.join();
            }
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
        }
        // Fixed shard order keeps the floating sums independent of the job count.
        std::vector<std::vector<KahanComplex>> wil(loop_edges_.size(), std::vector<KahanComplex>(keys_));
        for (const auto& sh : shards) {
            if (sh.count.empty()) continue;
            out.visited += sh.visited;
            for (std::size_t k = 0; k < keys_; ++k) out.count[k] += sh.count[k];
            for (std::size_t i = 0; i < wil.size(); ++i) {
                for (std::size_t k = 0; k < keys_; ++k) wil[i][k].add(sh.wilson[i][k].value());
                for (std::size_t j = 0; j < out.ngamma[i].size(); ++j) out.ngamma[i][j] += sh.ngamma[i][j];
            }
            for (std::size_t j = 0; j < events_.size(); ++j)
                for (std::size_t k = 0; k < keys_; ++k) out.event[j][k] += sh.event[j][k];
        }
        for (std::size_t i = 0; i < wil.size(); ++i)
            for (std::size_t k = 0; k < keys_; ++k) out.wilson[i][k] = wil[i][k].value();
        out.seconds = std::chrono::duration<double>(Clock::now() - start_).count();
        return out;
    }

private:
    void build_levels() {
        const int n = g_.order();
        level_of_.assign(n, -1);
        for (Elem h = 1; h < n; ++h) {
            const double gap = rep_.gap(h);
            if (gap <= 1e-12) continue;
            auto it = std::find_if(gaps_.begin(), gaps_.end(), [&](double v) { return std::abs(v - gap) <= 1e-9 * gap; });
            if (it == gaps_.end()) gaps_.push_back(gap);
        }
        std::sort(gaps_.begin(), gaps_.end());
        for (Elem h = 1; h < n; ++h) {
            const double gap = rep_.gap(h);
            for (std::size_t i = 0; i < gaps_.size(); ++i)
                if (gap > 1e-12 && std::abs(gaps_[i] - gap) <= 1e-9 * gap) level_of_[h] = static_cast<int>(i);
        }
        base_ = (restricted_ ? req_.restrict_support->size() : cx_.count(2)) + 1;
        keys_ = 1;
        for (std::size_t i = 0; i < gaps_.size(); ++i) {
            radix_.push_back(keys_);
            keys_ *= base_;
            if (keys_ > (std::size_t{1} << 22)) throw LgtError(ErrorKind::Budget, "too many action levels to tabulate");
        }
    }

    // Greedy order: next edge closes as many plaquettes as possible.
    void build_order(const SpanningTree& tree) {
        const std::size_t np = cx_.count(2), ne = cx_.count(1);
        std::vector<int> remaining(np, 0);
        std::vector<char> pending(ne, 0);
        for (std::size_t e = 0; e < ne; ++e) {
            if (tree.in_tree[e]) continue;
            pending[e] = 1;
            for (std::size_t p : cx_.edge_plaquettes(e)) ++remaining[p];
        }
        // Plaquettes with only tree edges have identity holonomy.
        for (std::size_t p = 0; p < np; ++p)
            if (remaining[p] == 0 && restricted_ && in_support_[p]) infeasible_ = true;
        std::size_t left = static_cast<std::size_t>(std::count(pending.begin(), pending.end(), 1));
        while (left > 0) {
            std::size_t best = ne;
            std::pair<int, int> best_score{-1, -1};
            for (std::size_t e = 0; e < ne; ++e) {
                if (!pending[e]) continue;
                std::pair<int, int> score{0, 0};
                for (std::size_t p : cx_.edge_plaquettes(e)) {
                    if (remaining[p] == 1) ++score.first;
                    if (remaining[p] == 2) ++score.second;
                }
                if (score > best_score) {
                    best_score = score;
                    best = e;
                }
            }
            pending[best] = 0;
            --left;
            order_.push_back(best);
            std::vector<std::size_t> closes;
            for (std::size_t p : cx_.edge_plaquettes(best))
                if (--remaining[p] == 0) closes.push_back(p);
            closing_.push_back(std::move(closes));
        }
    }

    Elem holonomy(const EdgeConfig& sigma, std::size_t p) const {
        const auto& edges = cx_.plaquette_edges(p);
        Elem acc = 0;
        for (const auto& pe : edges) {
            const Elem v = sigma[pe.edge];
            acc = g_.mul(acc, pe.orientation > 0 ? v : g_.inv(v));
        }
        return acc;
    }

    void tick(Shard& sh) {
        ++sh.visited;
        if ((sh.visited & 0x3ffff) != 0) return;
        if (stop_) throw LgtError(ErrorKind::Budget, "enumeration aborted");
        if (restricted_ && sh.visited > budget_.max_configs)
            throw LgtError(ErrorKind::Budget, "restricted search exceeded " + std::to_string(budget_.max_configs) +
                                                  " nodes");
        const double secs = std::chrono::duration<double>(Clock::now() - start_).count();
        if (secs > budget_.max_seconds)
            throw LgtError(ErrorKind::Budget, "enumeration exceeded " + std::to_string(budget_.max_seconds) + " s");
    }

    void run_shard(Elem first, Shard& sh) {
        sh.count.assign(keys_, 0);
        sh.wilson.assign(loop_edges_.size(), std::vector<KahanComplex>(keys_));
        for (std::size_t i = 0; i < loop_edges_.size(); ++i)
            sh.ngamma.emplace_back(req_.ngamma && use_mask_ ? keys_ * (loop_len_[i] + 1) : 0, 0);
        sh.event.assign(events_.size(), std::vector<std::uint64_t>(keys_, 0));
        EdgeConfig sigma(cx_.count(1), 0);
        dfs(0, 0, 0, sigma, sh, first);
    }

    void leaf(std::size_t key, std::uint64_t mask, const EdgeConfig& sigma, Shard& sh) {
        ++sh.count[key];
        for (std::size_t i = 0; i < loop_edges_.size(); ++i) {
            Elem acc = 0;
            for (const auto& de : loop_edges_[i]) {
                const Elem v = sigma[de.edge];
                acc = g_.mul(acc, de.orientation > 0 ? v : g_.inv(v));
            }
            sh.wilson[i][key].add(rep_.character(acc));
            if (!sh.ngamma[i].empty()) {
                std::size_t n = 0;
                for (const auto& t : loop_tests_[i]) n += t.holds(mask);
                ++sh.ngamma[i][key * (loop_len_[i] + 1) + n];
            }
        }
        for (std::size_t j = 0; j < events_.size(); ++j)
            if (events_[j].holds(mask)) ++sh.event[j][key];
    }

    void dfs(std::size_t d, std::size_t key, std::uint64_t mask, EdgeConfig& sigma, Shard& sh, Elem first) {
        if (d == order_.size()) {
            leaf(key, mask, sigma, sh);
            return;
        }
        const std::size_t e = order_[d];
        const Elem lo = d == 0 ? first : 0, hi = d == 0 ? first + 1 : static_cast<Elem>(g_.order());
        for (Elem v = lo; v < hi; ++v) {
            sigma[e] = v;
            tick(sh);
            std::size_t k2 = key;
            std::uint64_t m2 = mask;
            bool ok = true;
            for (std::size_t p : closing_[d]) {
                const Elem h = holonomy(sigma, p);
                if (restricted_ && (h != 0) != (in_support_[p] != 0)) {
                    ok = false;
                    break;
                }
                if (level_of_[h] >= 0) k2 += radix_[level_of_[h]];
                if (use_mask_ && h != 0) m2 |= std::uint64_t{1} << p;
            }
            if (ok) dfs(d + 1, k2, m2, sigma, sh, first);
        }
        sigma[e] = 0;
    }

    const CellComplex& cx_;
    const UnitaryRep& rep_;
    const GroupTable& g_;
    const EnumerationRequest& req_;
    EnumerationBudget budget_;
    Clock::time_point start_;
    bool restricted_ = false, use_mask_ = false, infeasible_ = false;
    std::vector<char> in_support_;
    std::vector<int> level_of_;
    std::vector<double> gaps_;
    std::vector<std::size_t> radix_;
    std::size_t base_ = 1, keys_ = 1;
    std::vector<std::size_t> order_;
    std::vector<std::vector<std::size_t>> closing_;
    std::vector<std::vector<DirectedEdge>> loop_edges_;
    std::vector<std::vector<PartTest>> loop_tests_;
    std::vector<std::size_t> loop_len_;
    std::vector<EventTest> events_;
    std::atomic<bool> stop_{false};
};

double weight_sum(const DensityOfStates& d, const std::vector<std::uint64_t>& counts, double beta) {
    Kahan s;
    for (std::size_t k = 0; k < counts.size(); ++k)
        if (counts[k]) s.add(static_cast<double>(counts[k]) * std::exp(-beta * d.energy[k]));
    return s.sum;
}

SpanningTree default_tree(const CellComplex& cx) { return bfs_tree(cx, cx.region().corner); }

}  // namespace

EnumerationBudget budget_from_env(EnumerationBudget base) {
    if (const char* v = std::getenv("LGT_BUDGET")) {
        try {
            std::size_t used = 0;
            const auto n = std::stoull(v, &used);
            if (used != std::string(v).size() || n == 0) throw std::invalid_argument(v);
            base.max_configs = n;
        } catch (const std::exception&) {
            throw LgtError(ErrorKind::Config, std::string("LGT_BUDGET must be a positive integer, got '") + v + "'");
        }
    }
    return base;
}

double DensityOfStates::gauge_fixed_sum(double beta) const { return weight_sum(*this, count, beta); }

double DensityOfStates::log_partition(double beta) const {
    return std::log(gauge_fixed_sum(beta)) + static_cast<double>(vertices - 1) * std::log(static_cast<double>(group_order));
}

std::uint64_t DensityOfStates::configurations() const {
    std::uint64_t n = 0;
    for (auto c : count) n += c;
    return n;
}

Complex DensityOfStates::wilson_mean(std::size_t loop, double beta) const {
    KahanComplex s;
    for (std::size_t k = 0; k < count.size(); ++k)
        if (count[k]) s.add(wilson.at(loop)[k] * std::exp(-beta * energy[k]));
    return s.value() / gauge_fixed_sum(beta);
}

std::vector<double> DensityOfStates::ngamma_pmf(std::size_t loop, double beta) const {
    const auto& table = ngamma.at(loop);
    if (table.empty()) throw LgtError(ErrorKind::Precondition, "N_gamma counts were not collected");
    const std::size_t len = loop_length[loop];
    std::vector<double> pmf(len + 1, 0.0);
    const double z = gauge_fixed_sum(beta);
    for (std::size_t n = 0; n <= len; ++n) {
        Kahan s;
        for (std::size_t k = 0; k < count.size(); ++k) {
            const auto c = table[k * (len + 1) + n];
            if (c) s.add(static_cast<double>(c) * std::exp(-beta * energy[k]));
        }
        pmf[n] = s.sum / z;
    }
    return pmf;
}

double DensityOfStates::event_probability(std::size_t ev, double beta) const {
    return weight_sum(*this, event.at(ev), beta) / gauge_fixed_sum(beta);
}

DensityOfStates enumerate_gauge_fixed(const CellComplex& cx, const UnitaryRep& rep, const SpanningTree& tree,
                                      const EnumerationRequest& req, const EnumerationBudget& budget) {
    Engine engine(cx, rep, tree, req, budget);
    return engine.run();
}

std::vector<std::uint64_t> full_histogram_z2(const CellComplex& cx) {
    const std::size_t ne = cx.count(1), np = cx.count(2);
    if (ne > 40 || np > 64) throw LgtError(ErrorKind::Budget, "Gray-code enumeration limited to 40 edges");
    std::vector<std::uint64_t> flip(ne, 0);
    for (std::size_t e = 0; e < ne; ++e)
        for (std::size_t p : cx.edge_plaquettes(e)) flip[e] |= std::uint64_t{1} << p;
    std::vector<std::uint64_t> hist(np + 1, 0);
    hist[0] = 1;
    std::uint64_t mask = 0;
    const std::uint64_t total = std::uint64_t{1} << ne;
    for (std::uint64_t i = 1; i < total; ++i) {
        mask ^= flip[std::countr_zero(i)];
        ++hist[std::popcount(mask)];
    }
    return hist;
}

namespace {

constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) {
    const unsigned __int128 r = static_cast<unsigned __int128>(a) * b;
    std::uint64_t lo = static_cast<std::uint64_t>(r & kPrime), hi = static_cast<std::uint64_t>(r >> 61);
    std::uint64_t s = lo + hi;
    if (s >= kPrime) s -= kPrime;
    return s;
}

std::uint64_t addmod(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a + b;
    if (s >= kPrime) s -= kPrime;
    return s;
}

std::uint64_t submod(std::uint64_t a, std::uint64_t b) { return a >= b ? a - b : a + kPrime - b; }

std::uint64_t powmod(std::uint64_t a, std::uint64_t e) {
    std::uint64_t r = 1;
    while (e) {
        if (e & 1) r = mulmod(r, a);
        a = mulmod(a, a);
        e >>= 1;
    }
    return r;
}

std::uint64_t invmod(std::uint64_t a) { return powmod(a, kPrime - 2); }

// Coefficients c_0..c_deg of the polynomial through (x_i, y_i), x_i = i, modulo the prime.
std::vector<std::uint64_t> interpolate(const std::vector<std::uint64_t>& y) {
    const std::size_t n = y.size();
    std::vector<std::vector<std::uint64_t>> a(n, std::vector<std::uint64_t>(n + 1));
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t xp = 1;
        for (std::size_t j = 0; j < n; ++j) {
            a[i][j] = xp;
            xp = mulmod(xp, i);
        }
        a[i][n] = y[i];
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (a[piv][c] == 0) ++piv;
        std::swap(a[piv], a[c]);
        const std::uint64_t inv = invmod(a[c][c]);
        for (auto& v : a[c]) v = mulmod(v, inv);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || a[r][c] == 0) continue;
            const std::uint64_t f = a[r][c];
            for (std::size_t k = c; k <= n; ++k) a[r][k] = submod(a[r][k], mulmod(f, a[c][k]));
        }
    }
    std::vector<std::uint64_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i][n];
    return out;
}

}  // namespace

std::vector<std::uint64_t> full_histogram_cyclic(const CellComplex& cx, int n) {
    if (cx.side() != 1) throw LgtError(ErrorKind::Precondition, "slice character sum needs the single 4-cell");
    if (n < 2 || (kPrime - 1) % static_cast<std::uint64_t>(n) != 0)
        throw LgtError(ErrorKind::Precondition, "cyclic order must divide p - 1 of the 61-bit prime");
    const Vertex c0 = cx.region().corner;
    // Slice edges: directions 1..3 at time c0[3] (slot 0) and c0[3] + 1 (slot 1).
    std::vector<std::size_t> slice_edges[2];
    std::vector<std::size_t> vertical;
    for (std::size_t e = 0; e < cx.count(1); ++e) {
        const auto cell = cx.cell(1, e);
        if (cx.edge_direction(e) == 3) vertical.push_back(e);
        else slice_edges[cell.base[3] - c0[3]].push_back(e);
    }
    auto slot_index = [&](int slot, std::size_t e) {
        return static_cast<std::size_t>(std::find(slice_edges[slot].begin(), slice_edges[slot].end(), e) -
                                        slice_edges[slot].begin());
    };
    const std::size_t m = slice_edges[0].size();  // 12
    // Partner in slot 1 of each slot-0 edge.
    std::vector<std::size_t> partner(m);
    for (std::size_t j = 0; j < m; ++j) {
        auto cell = cx.cell(1, slice_edges[0][j]);
        cell.base[3] += 1;
        partner[j] = slot_index(1, *cx.find(cell.base, cell.dirs));
    }
    std::size_t states = 1;
    for (std::size_t j = 0; j < m; ++j) states *= static_cast<std::size_t>(n);

    // Excited-plaquette count of each slice configuration, indexed in slot-0 edge order.
    std::vector<std::uint8_t> excited[2];
    for (int slot = 0; slot < 2; ++slot) {
        std::vector<std::vector<std::pair<std::size_t, int>>> plaqs;
        for (std::size_t p = 0; p < cx.count(2); ++p) {
            const auto cell = cx.cell(2, p);
            if ((cell.dirs & 0b1000) || cell.base[3] - c0[3] != slot) continue;
            std::vector<std::pair<std::size_t, int>> terms;
            for (const auto& pe : cx.plaquette_edges(p)) {
                std::size_t j = slot_index(slot, pe.edge);
                if (slot == 1) j = static_cast<std::size_t>(std::find(partner.begin(), partner.end(), j) - partner.begin());
                terms.emplace_back(j, pe.orientation);
            }
            plaqs.push_back(terms);
        }
        excited[slot].assign(states, 0);
        std::vector<int> a(m, 0);
        for (std::size_t idx = 0; idx < states; ++idx) {
            std::size_t r = idx;
            for (std::size_t j = 0; j < m; ++j) {
                a[j] = static_cast<int>(r % n);
                r /= n;
            }
            int cnt = 0;
            for (const auto& terms : plaqs) {
                int s = 0;
                for (auto [j, o] : terms) s += o * a[j];
                cnt += ((s % n) + n) % n != 0;
            }
            excited[slot][idx] = static_cast<std::uint8_t>(cnt);
        }
    }

    // Vertical plaquettes: holonomy s0 a_j + s1 b_j + sum over vertical edges.
    std::vector<int> s0(m), s1(m);
    std::vector<std::vector<int>> coeff(m, std::vector<int>(vertical.size(), 0));
    for (std::size_t p = 0; p < cx.count(2); ++p) {
        const auto cell = cx.cell(2, p);
        if (!(cell.dirs & 0b1000)) continue;
        std::ptrdiff_t j = -1;
        for (const auto& pe : cx.plaquette_edges(p)) {
            if (cx.edge_direction(pe.edge) != 3 && cx.cell(1, pe.edge).base[3] == c0[3]) {
                j = static_cast<std::ptrdiff_t>(slot_index(0, pe.edge));
                s0[j] = pe.orientation;
            }
        }
        for (const auto& pe : cx.plaquette_edges(p)) {
            if (cx.edge_direction(pe.edge) == 3) {
                const auto w = static_cast<std::size_t>(std::find(vertical.begin(), vertical.end(), pe.edge) - vertical.begin());
                coeff[j][w] += pe.orientation;
            } else if (cx.cell(1, pe.edge).base[3] != c0[3]) {
                if (partner[j] != slot_index(1, pe.edge)) throw std::logic_error("slice partner mismatch");
                s1[j] = pe.orientation;
            }
        }
    }

    // Frequencies m whose vertical character sum survives, with the index maps.
    std::vector<std::size_t> valid, idx0, idx1;
    std::vector<int> zeros;
    {
        std::vector<int> fm(m);
        for (std::size_t idx = 0; idx < states; ++idx) {
            std::size_t r = idx;
            for (std::size_t j = 0; j < m; ++j) {
                fm[j] = static_cast<int>(r % n);
                r /= n;
            }
            bool ok = true;
            for (std::size_t w = 0; w < vertical.size() && ok; ++w) {
                int s = 0;
                for (std::size_t j = 0; j < m; ++j) s += fm[j] * coeff[j][w];
                ok = ((s % n) + n) % n == 0;
            }
            if (!ok) continue;
            std::size_t i0 = 0, i1 = 0, place = 1;
            int z = 0;
            for (std::size_t j = 0; j < m; ++j) {
                i0 += static_cast<std::size_t>((((-s0[j] * fm[j]) % n) + n) % n) * place;
                i1 += static_cast<std::size_t>((((-s1[j] * fm[j]) % n) + n) % n) * place;
                place *= static_cast<std::size_t>(n);
                z += fm[j] == 0;
            }
            valid.push_back(idx);
            idx0.push_back(i0);
            idx1.push_back(i1);
            zeros.push_back(z);
        }
    }

    const std::uint64_t omega = [&] {
        for (std::uint64_t gen = 2;; ++gen) {
            const std::uint64_t w = powmod(gen, (kPrime - 1) / static_cast<std::uint64_t>(n));
            bool primitive = true;
            for (int k = 1; k < n && primitive; ++k) primitive = powmod(w, static_cast<std::uint64_t>(k)) != 1;
            if (primitive) return w;
        }
    }();
    std::vector<std::uint64_t> wpow(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) wpow[k] = powmod(omega, static_cast<std::uint64_t>(k));

    // Forward transform F(k) = sum_a f(a) w^(k.a), one axis at a time.
    auto transform = [&](std::vector<std::uint64_t>& f) {
        std::size_t stride = 1;
        std::vector<std::uint64_t> in(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n));
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t base = 0; base < states; ++base) {
                if ((base / stride) % n != 0) continue;
                for (int t = 0; t < n; ++t) in[t] = f[base + t * stride];
                for (int k = 0; k < n; ++k) {
                    std::uint64_t s = 0;
                    for (int t = 0; t < n; ++t) s = addmod(s, mulmod(in[t], wpow[(k * t) % n]));
                    out[k] = s;
                }
                for (int k = 0; k < n; ++k) f[base + k * stride] = out[k];
            }
            stride *= static_cast<std::size_t>(n);
        }
    };

    const std::size_t np = cx.count(2);
    const std::uint64_t norm = invmod(powmod(static_cast<std::uint64_t>(n), m - vertical.size()));
    std::vector<std::uint64_t> values(np + 1);
    std::vector<std::uint64_t> f0(states), f1(states);
    for (std::size_t xi = 0; xi <= np; ++xi) {
        const std::uint64_t x = xi;
        std::vector<std::uint64_t> xp(np + 1);
        xp[0] = 1;
        for (std::size_t k = 1; k <= np; ++k) xp[k] = mulmod(xp[k - 1], x);
        for (std::size_t s = 0; s < states; ++s) {
            f0[s] = xp[excited[0][s]];
            f1[s] = xp[excited[1][s]];
        }
        transform(f0);
        transform(f1);
        const std::uint64_t k_zero = addmod(1, mulmod(static_cast<std::uint64_t>(n - 1), x));
        const std::uint64_t k_other = submod(1, x);
        std::vector<std::uint64_t> kz(m + 1), ko(m + 1);
        kz[0] = ko[0] = 1;
        for (std::size_t k = 1; k <= m; ++k) {
            kz[k] = mulmod(kz[k - 1], k_zero);
            ko[k] = mulmod(ko[k - 1], k_other);
        }
        std::uint64_t total = 0;
        for (std::size_t v = 0; v < valid.size(); ++v) {
            const std::uint64_t kernel = mulmod(kz[zeros[v]], ko[m - zeros[v]]);
            total = addmod(total, mulmod(kernel, mulmod(f0[idx0[v]], f1[idx1[v]])));
        }
        values[xi] = mulmod(total, norm);
    }
    const auto coeffs = interpolate(values);
    // The coefficients sum to n^edges, which must stay below the prime for exactness.
    long double total = 0;
    for (auto c : coeffs) total += static_cast<long double>(c);
    if (std::abs(total - std::pow(static_cast<long double>(n), static_cast<long double>(cx.count(1)))) > 0.5L)
        throw std::logic_error("slice character sum does not account for every configuration");
    return coeffs;
}

double partition_function(const CellComplex& cx, const UnitaryRep& rep, double beta, const EnumerationBudget& budget) {
    EnumerationRequest req;
    req.ngamma = false;
    return std::exp(enumerate_gauge_fixed(cx, rep, default_tree(cx), req, budget).log_partition(beta));
}

Complex wilson_exact(const CellComplex& cx, const UnitaryRep& rep, double beta, const Loop& loop,
                     const EnumerationBudget& budget) {
    if (!loop.is_self_avoiding()) throw LgtError(ErrorKind::Precondition, "loop must be self-avoiding");
    EnumerationRequest req;
    req.loops = {loop};
    req.ngamma = false;
    return enumerate_gauge_fixed(cx, rep, default_tree(cx), req, budget).wilson_mean(0, beta);
}

std::vector<double> ngamma_pmf_exact(const CellComplex& cx, const UnitaryRep& rep, double beta, const Loop& loop,
                                     const EnumerationBudget& budget) {
    if (!loop.is_self_avoiding()) throw LgtError(ErrorKind::Precondition, "loop must be self-avoiding");
    EnumerationRequest req;
    req.loops = {loop};
    return enumerate_gauge_fixed(cx, rep, default_tree(cx), req, budget).ngamma_pmf(0, beta);
}

PhiValue phi_of_set(const CellComplex& cx, const UnitaryRep& rep, double beta, const PlaquetteSet& P,
                    const std::vector<Loop>& loops, const SpanningTree* tree, const EnumerationBudget& budget) {
    EnumerationRequest req;
    req.loops = loops;
    req.ngamma = false;
    req.restrict_support = P;
    const SpanningTree t = tree ? *tree : default_tree(cx);
    const auto dos = enumerate_gauge_fixed(cx, rep, t, req, budget);
    PhiValue out;
    out.phi = dos.gauge_fixed_sum(beta);
    out.configs = dos.configurations();
    for (std::size_t i = 0; i < loops.size(); ++i) {
        KahanComplex s;
        for (std::size_t k = 0; k < dos.count.size(); ++k)
            if (dos.count[k]) s.add(dos.wilson[i][k] * std::exp(-beta * dos.energy[k]));
        out.phi_gamma.push_back(s.value());
    }
    return out;
}

QFormPhi phi_qforms(const CellComplex& cx, const UnitaryRep& rep, double beta, const PlaquetteSet& P,
                    const IntForm* surface, const EnumerationBudget& budget) {
    const GroupTable& g = rep.group();
    if (!g.is_abelian()) throw LgtError(ErrorKind::Precondition, "q-form sums need an Abelian group");
    QFormPhi out;
    const int choices = g.order() - 1;
    if (P.empty()) {
        out.phi = 1.0;
        out.phi_s = rep.character(0);
        out.forms = 1;
        return out;
    }
    if (choices == 0) return out;
    const long double need = std::pow(static_cast<long double>(choices), static_cast<long double>(P.size()));
    if (need > static_cast<long double>(budget.max_configs))
        throw LgtError(ErrorKind::Budget, "q-form sum requires " + std::to_string(choices) + "^" +
                                              std::to_string(P.size()) + " assignments");
    // 3-cells touching P, with the positions of their faces inside P.
    std::vector<std::vector<std::pair<std::size_t, int>>> cells;
    {
        std::vector<std::size_t> ids;
        for (std::size_t p : P)
            for (const auto& c : cx.cofaces(2, p)) ids.push_back(c.index);
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        for (std::size_t c : ids) {
            std::vector<std::pair<std::size_t, int>> terms;
            for (const auto& f : cx.faces(3, c)) {
                auto it = std::lower_bound(P.begin(), P.end(), f.index);
                if (it != P.end() && *it == f.index) terms.emplace_back(static_cast<std::size_t>(it - P.begin()), f.sign);
            }
            cells.push_back(std::move(terms));
        }
    }
    std::vector<std::int64_t> S(P.size(), 0);
    if (surface) {
        if (surface->degree != 2) throw LgtError(ErrorKind::Degree, "surface must be a 2-form");
        for (std::size_t i = 0; i < P.size(); ++i) S[i] = surface->values[static_cast<Eigen::Index>(P[i])];
        // Plaquettes of S outside P carry q = 1 and drop out of <q, S>.
    }
    std::vector<Elem> q(P.size(), 1);
    Kahan phi;
    KahanComplex phis;
    while (true) {
        bool closed = true;
        for (const auto& terms : cells) {
            Elem acc = 0;
            for (auto [i, s] : terms) acc = g.mul(acc, s > 0 ? q[i] : g.inv(q[i]));
            if (acc != 0) {
                closed = false;
                break;
            }
        }
        if (closed) {
            double energy = 0.0;
            Elem pair = 0;
            for (std::size_t i = 0; i < P.size(); ++i) {
                energy += rep.gap(q[i]);
                if (S[i] != 0) pair = g.mul(pair, g.power(q[i], S[i]));
            }
            const double w = std::exp(-beta * energy);
            phi.add(w);
            phis.add(w * rep.character(pair));
            ++out.forms;
        }
        std::size_t k = 0;
        while (k < q.size() && q[k] == choices) q[k++] = 1;
        if (k == q.size()) break;
        ++q[k];
    }
    out.phi = phi.sum;
    out.phi_s = phis.value();
    return out;
}

Complex abelian_conditional(const CellComplex& cx, const UnitaryRep& rep, double beta, const PlaquetteSet& P,
                            const Loop& gamma, const EnumerationBudget& budget) {
    if (!rep.group().is_abelian()) throw LgtError(ErrorKind::Precondition, "abelian_conditional needs an Abelian group");
    const IntForm S = surface_fill(cx, gamma);
    const auto r = phi_qforms(cx, rep, beta, P, &S, budget);
    if (r.forms == 0 || r.phi <= 0.0)
        throw LgtError(ErrorKind::ConditioningOnNull, "P(P(Sigma) = P) = 0: no closed 2-form has this support");
    return r.phi_s / r.phi;
}

FactorizationMode factorization_mode_from_string(const std::string& s) {
    if (s == "minimal-vortex") return FactorizationMode::MinimalVortex;
    if (s == "well-separated") return FactorizationMode::WellSeparated;
    if (s == "abelian-compatible") return FactorizationMode::AbelianCompatible;
    throw LgtError(ErrorKind::Config, "unknown factorization mode '" + s + "'");
}

FactorizationResult factorization_check(const CellComplex& cx, const UnitaryRep& rep, double beta,
                                        const PlaquetteSet& P1, const PlaquetteSet& P2, FactorizationMode mode,
                                        const EnumerationBudget& budget) {
    switch (mode) {
        case FactorizationMode::AbelianCompatible:
            if (!rep.group().is_abelian() || !compatible(cx, P1, P2))
                throw LgtError(ErrorKind::Precondition, "needs an Abelian group and compatible sets");
            break;
        case FactorizationMode::MinimalVortex: {
            const auto e = minimal_vortex_edge(cx, P1);
            if (!e || !is_bulk_edge(cx, *e) || !compatible(cx, P1, P2))
                throw LgtError(ErrorKind::Precondition, "P1 must be a bulk minimal vortex compatible with P2");
            break;
        }
        case FactorizationMode::WellSeparated:
            if (!find_separating_cube(cx, P1, P2))
                throw LgtError(ErrorKind::Precondition, "no cube well separates P1 from P2");
            break;
    }
    PlaquetteSet both = P1;
    both.insert(both.end(), P2.begin(), P2.end());
    std::sort(both.begin(), both.end());
    if (std::adjacent_find(both.begin(), both.end()) != both.end())
        throw LgtError(ErrorKind::Precondition, "P1 and P2 must be disjoint");
    FactorizationResult r;
    r.phi1 = phi_of_set(cx, rep, beta, P1, {}, nullptr, budget).phi;
    r.phi2 = phi_of_set(cx, rep, beta, P2, {}, nullptr, budget).phi;
    r.phi12 = phi_of_set(cx, rep, beta, both, {}, nullptr, budget).phi;
    const double prod = r.phi1 * r.phi2;
    r.residual = std::abs(r.phi12 - prod) / std::max(prod, 1e-300);
    return r;
}

double vortex_event_prob(const CellComplex& cx, const UnitaryRep& rep, double beta, const VortexEvent& ev,
                         const EnumerationBudget& budget) {
    for (const auto* list : {&ev.appear, &ev.absent, &ev.avoid_neighborhood})
        for (const auto& V : *list)
            if (!is_vortex(cx, V)) throw LgtError(ErrorKind::Precondition, "event sets must be vortices");
    for (std::size_t i = 0; i < ev.appear.size(); ++i)
        for (std::size_t j = i + 1; j < ev.appear.size(); ++j)
            if (!compatible(cx, ev.appear[i], ev.appear[j])) return 0.0;
    EnumerationRequest req;
    req.events = {ev};
    req.ngamma = false;
    return enumerate_gauge_fixed(cx, rep, default_tree(cx), req, budget).event_probability(0, beta);
}

double reduced_correlation(const CellComplex& cx, const UnitaryRep& rep, double beta,
                           const std::vector<PlaquetteSet>& neighborhood_of,
                           const std::vector<PlaquetteSet>& explicit_list, const EnumerationBudget& budget) {
    VortexEvent ev;
    ev.absent = explicit_list;
    ev.avoid_neighborhood = neighborhood_of;
    return vortex_event_prob(cx, rep, beta, ev, budget);
}

}  // namespace lgt
