#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lgt/exact.hpp"
#include "lgt/sampler.hpp"

namespace lgt {

extern const char* const kVersion;

struct ExperimentConfig {
    std::string command;
    std::string group;
    std::string rep;
    std::optional<CubeRegion> region;
    std::vector<Loop> loops;
    std::vector<double> betas;
    std::vector<double> ells;
    SamplerParams sampler;
    EnumerationBudget budget;
    std::uint64_t seed = 1;
    std::string suite = "acceptance";
    std::string source = "mc";  // diagnose-poisson: "mc" or "oracle"
    std::optional<double> N, L;
};

// Validates the document against the schema; unknown keys are a Config error.
ExperimentConfig parse_config(const nlohmann::json& doc);

// Command-line overrides, applied after the config file and before LGT_BUDGET.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;
    std::optional<std::uint64_t> budget;
};
void apply_overrides(ExperimentConfig& cfg, const Overrides& o);

nlohmann::ordered_json resolved_config(const ExperimentConfig& cfg);

struct OutputFile {
    std::string name;
    std::string content;
};

struct CommandOutput {
    std::vector<OutputFile> files;
    bool ok = true;  // false when a verify suite has failures
};

CommandOutput run_command(const ExperimentConfig& cfg);

}  // namespace lgt
