#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lgt/exact.hpp"

namespace lgt {

struct CheckResult {
    std::string id;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct VerifyOptions {
    std::uint64_t seed = 20240601;
    unsigned jobs = 1;
    EnumerationBudget budget;
};

using Check = std::function<CheckResult(const VerifyOptions&)>;

struct NamedCheck {
    std::string id;
    std::string title;
    Check run;
};

// The eleven acceptance criteria, in order.
std::vector<NamedCheck> acceptance_checks();

// Named invariant suites: dec, gauge, vortex, factorization, oracle-mc, theory, acceptance.
std::vector<std::string> suite_names();
std::vector<NamedCheck> suite(const std::string& name);

// Runs the checks, timing each and turning exceptions into failures.
std::vector<CheckResult> run_checks(const std::vector<NamedCheck>& checks, const VerifyOptions& opts,
                                    const std::function<void(const CheckResult&)>& on_result = {});

}  // namespace lgt
