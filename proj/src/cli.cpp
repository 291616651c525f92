#include "lgt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <set>
#include <sstream>

#include "lgt/catalog.hpp"
#include "lgt/theory.hpp"
#include "lgt/verify.hpp"

namespace lgt {

const char* const kVersion = "1.0.0";

namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

const std::set<std::string> kCommands{"predict", "sample", "oracle", "diagnose-poisson", "verify"};

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw LgtError(ErrorKind::Config, where + " must be an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) throw LgtError(ErrorKind::Config, "unknown key '" + key + "' in " + where);
}

template <class T>
T get_as(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw LgtError(ErrorKind::Config, "'" + key + "' has the wrong type");
    }
}

std::uint64_t get_count(const json& v, const std::string& key) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw LgtError(ErrorKind::Config, "'" + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

std::vector<double> number_list(const json& v, const std::string& key) {
    std::vector<double> out;
    if (v.is_number()) out.push_back(v.get<double>());
    else if (v.is_array())
        for (const auto& x : v) {
            if (!x.is_number()) throw LgtError(ErrorKind::Config, "'" + key + "' entries must be numbers");
            out.push_back(x.get<double>());
        }
    else throw LgtError(ErrorKind::Config, "'" + key + "' must be a number or a list of numbers");
    for (double x : out)
        if (!std::isfinite(x) || x < 0) throw LgtError(ErrorKind::Config, "'" + key + "' values must be finite and >= 0");
    return out;
}

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

// JSON has no infinities; they are written as strings.
ojson jnum(double v) {
    if (std::isfinite(v)) return v;
    return num(v);
}

std::string csv_header_block(const ExperimentConfig& cfg) {
    return "# lgt " + std::string(kVersion) + "\n# config: " + resolved_config(cfg).dump() + "\n";
}

ojson json_header(const ExperimentConfig& cfg) {
    ojson h;
    h["version"] = kVersion;
    h["config"] = resolved_config(cfg);
    return h;
}

RepPtr resolve_rep(const ExperimentConfig& cfg) {
    if (cfg.rep.empty()) throw LgtError(ErrorKind::Config, "'rep' is required");
    RepPtr rep;
    try {
        rep = rep_by_id(cfg.rep);
    } catch (const LgtError& e) {
        throw LgtError(ErrorKind::Config, std::string("unknown rep: ") + e.what());
    }
    if (!cfg.group.empty()) {
        GroupPtr g;
        try {
            g = group_by_id(cfg.group);
        } catch (const LgtError& e) {
            throw LgtError(ErrorKind::Config, std::string("unknown group: ") + e.what());
        }
        if (g->name() != rep->group().name())
            throw LgtError(ErrorKind::Config, "rep '" + cfg.rep + "' does not belong to group '" + cfg.group + "'");
    }
    return rep;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw LgtError(ErrorKind::Config, what);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

CommandOutput cmd_predict(const ExperimentConfig& cfg) {
    auto rep = resolve_rep(cfg);
    require(!cfg.betas.empty(), "'beta' is required");
    std::vector<double> ells = cfg.ells;
    for (const auto& l : cfg.loops) ells.push_back(static_cast<double>(l.length()));
    require(!ells.empty(), "'ell' or 'loop' is required");
    const bool abelian = rep->dim() == 1;
    const bool abelian_bound = abelian && cfg.N && cfg.L;
    const auto thr = beta_thresholds(*rep);
    std::ostringstream out;
    out << csv_header_block(cfg);
    out << "beta,ell,rep,regime,r_beta,log_r_beta,prediction,log_prediction,prediction_trace,prediction_abelian,"
           "bound_general,log_bound_general,threshold_general,threshold_general_ok,c_beta,degenerate,"
           "bound_abelian,log_bound_abelian,threshold_abelian,threshold_abelian_ok,poisson_tv_bound\n";
    for (double beta : cfg.betas)
        for (double ell : ells) {
            const auto p = predict_general(*rep, beta, ell);
            const auto b = error_bound_general(*rep, beta);
            out << num(beta) << ',' << num(ell) << ',' << rep->id() << ',' << (abelian ? "abelian-1d" : "general") << ','
                << num(p.r_beta) << ',' << num(p.log_r_beta) << ',' << num(p.value) << ',' << num(p.log_value) << ','
                << num(p.trace_form) << ',';
            if (abelian) out << num(predict_abelian(*rep, beta, ell).value);
            out << ',' << num(b.bound) << ',' << num(b.log_bound) << ',' << num(thr.main) << ','
                << (b.threshold_ok ? "true" : "false") << ',' << num(b.c_beta) << ',' << (b.degenerate ? "true" : "false")
                << ',';
            if (abelian_bound) {
                const auto a = error_bound_abelian(*rep, beta, *cfg.N, *cfg.L);
                out << num(a.bound) << ',' << num(a.log_bound) << ',' << num(thr.abelian) << ','
                    << (a.threshold_ok ? "true" : "false");
            } else {
                out << ",,,";
            }
            out << ','
                << num(abelian ? poisson_tv_bound_abelian(*rep, beta, ell) : poisson_tv_bound_general(*rep, beta, ell))
                << '\n';
        }
    return {{{"predict.csv", out.str()}}, true};
}

void require_lattice(const ExperimentConfig& cfg) {
    require(cfg.region.has_value(), "'region' is required");
    require(!cfg.loops.empty(), "'loop' is required");
    require(!cfg.betas.empty(), "'beta' is required");
}

ojson pmf_json(const std::vector<double>& p) {
    ojson a = ojson::array();
    for (double v : p) a.push_back(v);
    return a;
}

CommandOutput cmd_sample(const ExperimentConfig& cfg) {
    auto rep = resolve_rep(cfg);
    require_lattice(cfg);
    const CellComplex cx(*cfg.region);
    MeasurementPlan plan;
    plan.loops = cfg.loops;
    std::ostringstream csv;
    csv << csv_header_block(cfg);
    csv << "beta,ell,loop,estimate,stderr,ess,n,estimate_imag,acceptance\n";
    ojson hist;
    hist["header"] = json_header(cfg);
    hist["histograms"] = ojson::array();
    for (double beta : cfg.betas) {
        const auto mc = run_mc(cx, *rep, beta, plan, cfg.sampler);
        for (std::size_t l = 0; l < cfg.loops.size(); ++l) {
            const auto& w = mc.wilson[l];
            csv << num(beta) << ',' << cfg.loops[l].length() << ',' << l << ',' << num(w.mean.real()) << ','
                << num(w.stderr_) << ',' << num(w.ess) << ',' << w.samples << ',' << num(w.mean.imag()) << ','
                << num(mc.acceptance) << '\n';
            ojson h;
            h["beta"] = beta;
            h["ell"] = cfg.loops[l].length();
            h["loop"] = l;
            h["observable"] = "N_gamma";
            h["n"] = mc.ngamma[l].samples;
            h["pmf"] = pmf_json(mc.ngamma[l].histogram);
            h["stderr"] = pmf_json(mc.ngamma[l].histogram_se);
            hist["histograms"].push_back(std::move(h));
        }
    }
    return {{{"sample.csv", csv.str()}, {"histograms.json", hist.dump(2) + "\n"}}, true};
}

DensityOfStates oracle_tables(const ExperimentConfig& cfg, const CellComplex& cx, const UnitaryRep& rep) {
    EnumerationRequest req;
    req.loops = cfg.loops;
    req.jobs = cfg.sampler.jobs;
    req.ngamma = cx.count(2) <= 64;
    return enumerate_gauge_fixed(cx, rep, bfs_tree(cx, cfg.region->corner), req, cfg.budget);
}

CommandOutput cmd_oracle(const ExperimentConfig& cfg) {
    auto rep = resolve_rep(cfg);
    require(cfg.region.has_value(), "'region' is required");
    require(!cfg.betas.empty(), "'beta' is required");
    const CellComplex cx(*cfg.region);
    const auto dos = oracle_tables(cfg, cx, *rep);
    ojson doc;
    doc["header"] = json_header(cfg);
    doc["inputs"] = resolved_config(cfg);
    doc["value"] = ojson::array();
    for (double beta : cfg.betas) {
        ojson v;
        v["beta"] = beta;
        v["log_partition"] = dos.log_partition(beta);
        const double z = std::exp(dos.log_partition(beta));
        v["partition"] = z >= 1e-300 ? jnum(z) : ojson(nullptr);
        v["loops"] = ojson::array();
        for (std::size_t l = 0; l < cfg.loops.size(); ++l) {
            ojson w;
            const Complex m = dos.wilson_mean(l, beta);
            w["ell"] = cfg.loops[l].length();
            w["wilson"] = m.real();
            w["wilson_imag"] = m.imag();
            if (!dos.ngamma.empty()) w["ngamma_pmf"] = pmf_json(dos.ngamma_pmf(l, beta));
            v["loops"].push_back(std::move(w));
        }
        doc["value"].push_back(std::move(v));
    }
    doc["method"] = "gauge-fixed enumeration over " + std::to_string(dos.configurations()) + " configurations (" +
                    rep->group().name() + ", tree rooted at the region corner), times |G|^(|vertices|-1)";
    ojson used;
    used["configurations"] = dos.configurations();
    used["search_nodes"] = dos.visited;
    used["max_configurations"] = cfg.budget.max_configs;
    used["max_seconds"] = cfg.budget.max_seconds;
    doc["budget_used"] = used;
    return {{{"oracle.json", doc.dump(2) + "\n"}}, true};
}

CommandOutput cmd_diagnose(const ExperimentConfig& cfg) {
    auto rep = resolve_rep(cfg);
    require_lattice(cfg);
    require(cfg.source == "mc" || cfg.source == "oracle", "'source' must be \"mc\" or \"oracle\"");
    const CellComplex cx(*cfg.region);
    std::optional<DensityOfStates> dos;
    if (cfg.source == "oracle") dos = oracle_tables(cfg, cx, *rep);
    MeasurementPlan plan;
    plan.loops = cfg.loops;
    ojson doc;
    doc["header"] = json_header(cfg);
    doc["results"] = ojson::array();
    for (double beta : cfg.betas) {
        std::optional<MCResult> mc;
        if (!dos) mc = run_mc(cx, *rep, beta, plan, cfg.sampler);
        for (std::size_t l = 0; l < cfg.loops.size(); ++l) {
            const double ell = static_cast<double>(cfg.loops[l].length());
            const std::vector<double> pmf = dos ? dos->ngamma_pmf(l, beta) : mc->ngamma[l].histogram;
            const double lr = std::exp(std::log(ell) + log_r_beta(*rep, beta));
            ojson r;
            r["beta"] = beta;
            r["ell"] = cfg.loops[l].length();
            r["source"] = cfg.source;
            r["lambda"] = lr;
            r["tv"] = tv_to_poisson(pmf, lr);
            r["pmf"] = pmf_json(pmf);
            if (mc) r["pmf_stderr"] = pmf_json(mc->ngamma[l].histogram_se);
            r["poisson_pmf"] = pmf_json(poisson_pmf_table(lr, static_cast<long>(pmf.size()) - 1));
            r["tv_bound"] = jnum(rep->dim() == 1 ? poisson_tv_bound_abelian(*rep, beta, ell)
                                                 : poisson_tv_bound_general(*rep, beta, ell));
            r["left_tail_bound"] = left_tail_bound(ell, std::exp(log_r_beta(*rep, beta)));
            doc["results"].push_back(std::move(r));
        }
    }
    return {{{"diagnose_poisson.json", doc.dump(2) + "\n"}}, true};
}

CommandOutput cmd_verify(const ExperimentConfig& cfg) {
    VerifyOptions opts;
    opts.seed = cfg.seed;
    opts.jobs = cfg.sampler.jobs;
    opts.budget = cfg.budget;
    const auto checks = suite(cfg.suite);
    std::ostringstream out;
    out << csv_header_block(cfg);
    bool ok = true;
    for (const auto& r : run_checks(checks, opts)) {
        ok = ok && r.passed;
        out << (r.passed ? "PASS " : "FAIL ") << r.id << " " << r.title << ": " << r.detail << "\n";
    }
    out << (ok ? "suite " + cfg.suite + " passed\n" : "suite " + cfg.suite + " FAILED\n");
    return {{{"verify.txt", out.str()}}, ok};
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
    reject_unknown(doc, {"command", "group", "rep", "region", "loop", "beta", "ell", "sampler", "budget", "seed",
                         "suite", "source", "N", "L"},
                   "config");
    ExperimentConfig cfg;
    if (doc.contains("command")) {
        cfg.command = get_as<std::string>(doc["command"], "command");
        require(kCommands.count(cfg.command) > 0, "unknown command '" + cfg.command + "'");
    }
    if (doc.contains("group")) cfg.group = lower(get_as<std::string>(doc["group"], "group"));
    if (doc.contains("rep")) cfg.rep = lower(get_as<std::string>(doc["rep"], "rep"));
    if (doc.contains("region")) {
        const auto& r = doc["region"];
        reject_unknown(r, {"corner", "side"}, "region");
        CubeRegion region;
        if (r.contains("corner")) region.corner = get_as<Vertex>(r["corner"], "region.corner");
        require(r.contains("side"), "'region.side' is required");
        region.side = static_cast<int>(get_count(r["side"], "region.side"));
        require(region.side >= 1 && region.side <= 64, "'region.side' must be in 1..64");
        cfg.region = region;
    }
    if (doc.contains("loop")) {
        const auto& l = doc["loop"];
        std::vector<json> specs;
        if (l.is_array()) specs.assign(l.begin(), l.end());
        else specs.push_back(l);
        for (const auto& s : specs) {
            reject_unknown(s, {"start", "rectangle", "steps"}, "loop");
            if (s.contains("rectangle")) reject_unknown(s["rectangle"], {"w", "h", "i", "j"}, "loop.rectangle");
            require(s.contains("rectangle") != s.contains("steps"), "a loop needs exactly one of 'rectangle' or 'steps'");
            Loop loop;
            try {
                loop = Loop::from_json(s);
            } catch (const json::exception& e) {
                throw LgtError(ErrorKind::Config, std::string("bad loop: ") + e.what());
            }
            require(loop.is_closed() && loop.is_self_avoiding() && loop.length() >= 4,
                    "loops must be closed and self-avoiding");
            if (cfg.region)
                for (const auto& v : loop.vertices())
                    require(cfg.region->contains(v), "loop leaves the region");
            cfg.loops.push_back(std::move(loop));
        }
    }
    if (doc.contains("beta")) cfg.betas = number_list(doc["beta"], "beta");
    if (doc.contains("ell")) cfg.ells = number_list(doc["ell"], "ell");
    if (doc.contains("seed")) cfg.seed = get_count(doc["seed"], "seed");
    cfg.sampler.seed = cfg.seed;
    if (doc.contains("sampler")) {
        const auto& s = doc["sampler"];
        reject_unknown(s, {"algo", "schedule", "sweeps", "samples", "burnin", "thin", "seed", "chains"}, "sampler");
        if (s.contains("algo")) cfg.sampler.algo = algorithm_from_string(get_as<std::string>(s["algo"], "sampler.algo"));
        if (s.contains("schedule"))
            cfg.sampler.schedule = schedule_from_string(get_as<std::string>(s["schedule"], "sampler.schedule"));
        if (s.contains("burnin")) cfg.sampler.burnin = get_count(s["burnin"], "sampler.burnin");
        if (s.contains("thin")) cfg.sampler.thin = get_count(s["thin"], "sampler.thin");
        require(cfg.sampler.thin >= 1, "'sampler.thin' must be >= 1");
        require(!(s.contains("sweeps") && s.contains("samples")), "give 'sampler.sweeps' or 'sampler.samples', not both");
        // Sweeps after burn-in; one measurement every `thin` of them.
        if (s.contains("sweeps")) cfg.sampler.samples = get_count(s["sweeps"], "sampler.sweeps") / cfg.sampler.thin;
        if (s.contains("samples")) cfg.sampler.samples = get_count(s["samples"], "sampler.samples");
        if (s.contains("seed")) cfg.sampler.seed = get_count(s["seed"], "sampler.seed");
        if (s.contains("chains")) cfg.sampler.chains = get_count(s["chains"], "sampler.chains");
        require(cfg.sampler.chains >= 1, "'sampler.chains' must be >= 1");
    }
    if (doc.contains("budget")) {
        const auto& b = doc["budget"];
        if (b.is_object()) {
            reject_unknown(b, {"max_configs", "max_seconds"}, "budget");
            if (b.contains("max_configs")) cfg.budget.max_configs = get_count(b["max_configs"], "budget.max_configs");
            if (b.contains("max_seconds")) cfg.budget.max_seconds = get_as<double>(b["max_seconds"], "budget.max_seconds");
        } else {
            cfg.budget.max_configs = get_count(b, "budget");
        }
    }
    if (doc.contains("suite")) {
        cfg.suite = get_as<std::string>(doc["suite"], "suite");
        const auto names = suite_names();
        require(std::find(names.begin(), names.end(), cfg.suite) != names.end(), "unknown suite '" + cfg.suite + "'");
    }
    if (doc.contains("source")) cfg.source = get_as<std::string>(doc["source"], "source");
    if (doc.contains("N")) cfg.N = get_as<double>(doc["N"], "N");
    if (doc.contains("L")) cfg.L = get_as<double>(doc["L"], "L");
    return cfg;
}

void apply_overrides(ExperimentConfig& cfg, const Overrides& o) {
    if (o.seed) cfg.seed = cfg.sampler.seed = *o.seed;
    if (o.jobs) cfg.sampler.jobs = std::max(1u, *o.jobs);
    if (o.budget) cfg.budget.max_configs = *o.budget;
    cfg.budget = budget_from_env(cfg.budget);
}

ojson resolved_config(const ExperimentConfig& cfg) {
    ojson c;
    c["command"] = cfg.command;
    c["group"] = cfg.group.empty() && !cfg.rep.empty() ? rep_by_id(cfg.rep)->group().name() : cfg.group;
    c["rep"] = cfg.rep;
    if (cfg.region) {
        c["region"]["corner"] = cfg.region->corner;
        c["region"]["side"] = cfg.region->side;
    }
    c["loop"] = ojson::array();
    for (const auto& l : cfg.loops) c["loop"].push_back(ojson::parse(l.to_json().dump()));
    c["beta"] = cfg.betas;
    c["ell"] = cfg.ells;
    auto& s = c["sampler"];
    s["algo"] = cfg.sampler.algo == Algorithm::HeatBath ? "heatbath" : "metropolis";
    s["schedule"] = cfg.sampler.schedule == Schedule::Sequential ? "sequential" : "checkerboard";
    s["samples"] = cfg.sampler.samples;
    s["burnin"] = cfg.sampler.burnin;
    s["thin"] = cfg.sampler.thin;
    s["seed"] = cfg.sampler.seed;
    s["chains"] = cfg.sampler.chains;
    c["budget"]["max_configs"] = cfg.budget.max_configs;
    c["budget"]["max_seconds"] = cfg.budget.max_seconds;
    c["seed"] = cfg.seed;
    c["suite"] = cfg.suite;
    c["source"] = cfg.source;
    c["N"] = cfg.N ? ojson(*cfg.N) : ojson(nullptr);
    c["L"] = cfg.L ? ojson(*cfg.L) : ojson(nullptr);
    return c;
}

CommandOutput run_command(const ExperimentConfig& cfg) {
    if (cfg.command == "predict") return cmd_predict(cfg);
    if (cfg.command == "sample") return cmd_sample(cfg);
    if (cfg.command == "oracle") return cmd_oracle(cfg);
    if (cfg.command == "diagnose-poisson") return cmd_diagnose(cfg);
    if (cfg.command == "verify") return cmd_verify(cfg);
    throw LgtError(ErrorKind::Config, "no command given");
}

}  // namespace lgt
