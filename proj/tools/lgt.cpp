#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lgt/cli.hpp"

namespace fs = std::filesystem;

namespace {

int exit_code(lgt::ErrorKind k) {
    switch (k) {
        case lgt::ErrorKind::Config: return 2;
        case lgt::ErrorKind::Budget: return 3;
        default: return 4;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-group lattice gauge theory: predictions, sampling, exact oracle, verification"};
    app.set_version_flag("--version", std::string("lgt ") + lgt::kVersion);
    app.require_subcommand(1);

    std::string config_path, out_dir, suite;
    lgt::Overrides ov;
    std::uint64_t seed = 0, budget = 0;
    unsigned jobs = 1;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (default: stdout)");
        sub->add_option("--seed", seed, "seed, overrides the config");
        sub->add_option("--jobs", jobs, "worker cap")->check(CLI::PositiveNumber);
        sub->add_option("--budget", budget, "enumeration budget in configurations");
    };
    for (const char* name : {"predict", "sample", "oracle", "diagnose-poisson", "verify"}) {
        auto* sub = app.add_subcommand(name);
        add_common(sub);
        if (std::string(name) == "verify") sub->add_option("suite", suite, "dec, gauge, vortex, factorization, oracle-mc, theory, acceptance");
    }
    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();
    auto* sub = app.get_subcommands().front();

    try {
        nlohmann::json doc = nlohmann::json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            try {
                doc = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw lgt::LgtError(lgt::ErrorKind::Config, std::string("cannot parse config: ") + e.what());
            }
        }
        if (doc.is_object() && doc.contains("command") && doc["command"] != command)
            throw lgt::LgtError(lgt::ErrorKind::Config, "config is for '" + doc["command"].dump() + "', not '" + command + "'");
        if (doc.is_object()) doc["command"] = command;
        if (!suite.empty()) doc["suite"] = suite;
        auto cfg = lgt::parse_config(doc);
        if (sub->count("--seed")) ov.seed = seed;
        if (sub->count("--jobs")) ov.jobs = jobs;
        if (sub->count("--budget")) ov.budget = budget;
        lgt::apply_overrides(cfg, ov);

        const auto result = lgt::run_command(cfg);
        if (out_dir.empty()) {
            for (const auto& f : result.files) {
                if (result.files.size() > 1) std::cout << "## " << f.name << "\n";
                std::cout << f.content;
            }
        } else {
            fs::create_directories(out_dir);
            for (const auto& f : result.files) {
                std::ofstream o(fs::path(out_dir) / f.name, std::ios::binary);
                o << f.content;
                if (!o) throw lgt::LgtError(lgt::ErrorKind::Config, "cannot write " + f.name);
            }
        }
        return result.ok ? 0 : 1;
    } catch (const lgt::LgtError& e) {
        std::cerr << "lgt: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "lgt: " << e.what() << "\n";
        return 4;
    }
}
