#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "lgt/cli.hpp"
#include "lgt/theory.hpp"
#include "lgt/catalog.hpp"

using namespace lgt;
using nlohmann::json;

namespace {

ExperimentConfig config(const char* text) {
    auto cfg = parse_config(json::parse(text));
    apply_overrides(cfg, {});
    return cfg;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    ADD_FAILURE() << "no column " << name;
    return 0;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const LgtError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::Precondition;
}

constexpr const char* kSquare = R"({"rectangle": {"w": 1, "h": 1, "i": 1, "j": 2}})";

std::string small_lattice(const char* command, const char* rep, double beta, const char* extra = "") {
    std::ostringstream s;
    s << R"({"command": ")" << command << R"(", "rep": ")" << rep
      << R"(", "region": {"side": 1}, "loop": )" << kSquare << R"(, "beta": )" << beta
      << R"(, "sampler": {"sweeps": 40000, "burnin": 200, "thin": 2, "seed": 5})" << extra << "}";
    return s.str();
}

}  // namespace

TEST(Predict, OneRowPerBetaAndEll) {
    const auto out = run_command(config(R"({"command": "predict", "rep": "z3-k1", "beta": [1, 2, 3, 4, 5], "ell": 100})"));
    ASSERT_EQ(out.files.size(), 1u);
    const auto rows = csv_rows(out.files[0].content);
    ASSERT_EQ(rows.size(), 6u);
    const auto& h = rows[0];
    for (std::size_t r = 1; r < rows.size(); ++r) {
        ASSERT_EQ(rows[r].size(), h.size());
        // 1-d reps: the Abelian column repeats the general one.
        EXPECT_NEAR(std::stod(rows[r][column(h, "prediction")]), std::stod(rows[r][column(h, "prediction_abelian")]), 1e-12);
        EXPECT_EQ(rows[r][column(h, "threshold_general_ok")], "false");
    }
}

TEST(Predict, DegenerateSpectrumIsFlagged) {
    const auto rows = csv_rows(run_command(config(R"({"command": "predict", "rep": "z2-sign", "beta": [0.5, 5], "ell": [4, 40]})")).files[0].content);
    ASSERT_EQ(rows.size(), 5u);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        EXPECT_EQ(rows[r][column(rows[0], "degenerate")], "true");
        EXPECT_EQ(rows[r][column(rows[0], "bound_general")], "inf");
    }
}

TEST(Predict, LogColumnsSurviveUnderflow) {
    const auto rows = csv_rows(run_command(config(R"({"command": "predict", "rep": "z3-k1", "beta": 700, "ell": 100, "N": 200, "L": 60})")).files[0].content);
    ASSERT_EQ(rows.size(), 2u);
    const auto& h = rows[0];
    EXPECT_EQ(std::stod(rows[1][column(h, "r_beta")]), 0.0);
    EXPECT_NEAR(std::stod(rows[1][column(h, "log_r_beta")]), std::log(2.0) - 700 * 1.5 * 6, 1e-6);
    EXPECT_EQ(rows[1][column(h, "threshold_general_ok")], "true");
    EXPECT_EQ(rows[1][column(h, "threshold_abelian_ok")], "true");
}

TEST(Config, UnknownKeysAndBadIdsAreRejected) {
    EXPECT_EQ(kind_of([] { config(R"({"command": "predict", "rep": "z3-k1", "colour": 1})"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { config(R"({"sampler": {"sweep": 10}})"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { config(R"({"region": {"side": 2, "origin": [0, 0, 0, 0]}})"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { config(R"({"loop": {"steps": [1, 2, -1, -2], "name": "x"}})"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { config(R"({"beta": "high"})"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { config(R"({"beta": -1})"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { config(R"({"command": "plot"})"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { config(R"({"suite": "everything"})"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { config(R"({"sampler": {"algo": "wolff"}})"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { config(R"({"region": {"side": 1}, "loop": {"start": [1, 1, 0, 0], "rectangle": {"w": 1, "h": 1, "i": 1, "j": 2}}})"); }),
              ErrorKind::Config);
    EXPECT_EQ(kind_of([] { run_command(config(R"({"command": "predict", "rep": "z3-k9x", "beta": 1, "ell": 4})")); }),
              ErrorKind::Config);
    EXPECT_EQ(kind_of([] { run_command(config(R"({"command": "predict", "group": "s3", "rep": "z3-k1", "beta": 1, "ell": 4})")); }),
              ErrorKind::Config);
    EXPECT_EQ(kind_of([] { run_command(config(R"({"command": "sample", "rep": "z3-k1", "beta": 1})")); }), ErrorKind::Config);
}

TEST(Config, OverridesAndEnvironmentBudget) {
    auto cfg = parse_config(json::parse(R"({"seed": 3, "budget": 1000, "sampler": {"sweeps": 500, "thin": 5}})"));
    EXPECT_EQ(cfg.sampler.samples, 100u);
    apply_overrides(cfg, {std::uint64_t{9}, 2u, std::uint64_t{5000}});
    EXPECT_EQ(cfg.seed, 9u);
    EXPECT_EQ(cfg.sampler.seed, 9u);
    EXPECT_EQ(cfg.sampler.jobs, 2u);
    EXPECT_EQ(cfg.budget.max_configs, 5000u);
    ::setenv("LGT_BUDGET", "777", 1);
    apply_overrides(cfg, {std::nullopt, std::nullopt, std::uint64_t{5000}});
    ::unsetenv("LGT_BUDGET");
    EXPECT_EQ(cfg.budget.max_configs, 777u);
}

TEST(Outputs, EveryFileCarriesTheHeader) {
    for (const auto& text : {std::string(R"({"command": "predict", "rep": "z3-k1", "beta": 1, "ell": 4})"),
                             small_lattice("sample", "z2-sign", 0.4), small_lattice("oracle", "z2-sign", 0.4),
                             small_lattice("diagnose-poisson", "z2-sign", 0.4, R"(, "source": "oracle")")}) {
        const auto out = run_command(config(text.c_str()));
        for (const auto& f : out.files) {
            EXPECT_NE(f.content.find(kVersion), std::string::npos) << f.name;
            EXPECT_NE(f.content.find("\"max_configs\""), std::string::npos) << f.name;
        }
    }
}

TEST(Sample, SameSeedGivesIdenticalBytes) {
    const auto text = small_lattice("sample", "z3-k1", 0.5, "");
    const auto a = run_command(config(text.c_str()));
    auto cfg = config(text.c_str());
    cfg.sampler.jobs = 3;
    const auto b = run_command(cfg);
    ASSERT_EQ(a.files.size(), 2u);
    for (std::size_t i = 0; i < a.files.size(); ++i) EXPECT_EQ(a.files[i].content, b.files[i].content);
    auto other = config(text.c_str());
    apply_overrides(other, {std::uint64_t{6}, std::nullopt, std::nullopt});
    EXPECT_NE(run_command(other).files[0].content, a.files[0].content);
}

TEST(Sample, AgreesWithOracle) {
    for (const char* rep : {"z2-sign", "z3-k1"}) {
        const auto mc = csv_rows(run_command(config(small_lattice("sample", rep, 0.3).c_str())).files[0].content);
        const auto ex = json::parse(run_command(config(small_lattice("oracle", rep, 0.3).c_str())).files[0].content);
        const double exact = ex["value"][0]["loops"][0]["wilson"].get<double>();
        const double est = std::stod(mc[1][column(mc[0], "estimate")]);
        const double se = std::stod(mc[1][column(mc[0], "stderr")]);
        EXPECT_LE(std::abs(est - exact), 3 * se) << rep;
        const auto order = static_cast<double>(rep_by_id(rep)->group().order());
        EXPECT_EQ(ex["budget_used"]["configurations"].get<std::uint64_t>(), static_cast<std::uint64_t>(std::pow(order, 17))) << rep;
    }
}

TEST(Oracle, BudgetIsEnforced) {
    auto cfg = config(small_lattice("oracle", "s3-std2", 0.3).c_str());
    EXPECT_EQ(kind_of([&] { run_command(cfg); }), ErrorKind::Budget);
    auto tiny = config(small_lattice("oracle", "z2-sign", 0.3).c_str());
    tiny.budget.max_configs = 1000;
    EXPECT_EQ(kind_of([&] { run_command(tiny); }), ErrorKind::Budget);
}

TEST(DiagnosePoisson, ReportsTotalVariation) {
    const auto doc = json::parse(
        run_command(config(small_lattice("diagnose-poisson", "z2-sign", 0.6, R"(, "source": "oracle")").c_str())).files[0].content);
    const auto& r = doc["results"][0];
    const auto pmf = r["pmf"].get<std::vector<double>>();
    const double lambda = 4 * std::exp(-12 * 0.6);
    EXPECT_NEAR(r["lambda"].get<double>(), lambda, 1e-15);
    EXPECT_NEAR(r["tv"].get<double>(), tv_to_poisson(pmf, lambda), 1e-15);
    EXPECT_EQ(r["poisson_pmf"].size(), pmf.size());
}

TEST(Verify, ShippedSuitesPass) {
    for (const char* s : {"dec", "vortex", "theory"}) {
        const auto out = run_command(config((std::string(R"({"command": "verify", "suite": ")") + s + "\"}").c_str()));
        EXPECT_TRUE(out.ok) << out.files[0].content;
        EXPECT_NE(out.files[0].content.find("PASS"), std::string::npos);
    }
}
