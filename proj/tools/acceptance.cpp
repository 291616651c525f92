#include <cstdio>
#include <cstring>
#include <string>

#include "lgt/verify.hpp"

// Runs every acceptance criterion and prints one PASS/FAIL line each. Exits 0 once all
// criteria have run; with --strict, exits 1 if any failed.
int main(int argc, char** argv) {
    bool strict = false;
    std::string only;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--strict")) strict = true;
        else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) only = argv[++i];
        else {
            std::fprintf(stderr, "usage: %s [--strict] [--only ID]\n", argv[0]);
            return 2;
        }
    }
    lgt::VerifyOptions opts;
    opts.budget = lgt::budget_from_env(opts.budget);
    auto checks = lgt::acceptance_checks();
    if (!only.empty()) std::erase_if(checks, [&](const lgt::NamedCheck& c) { return c.id != only; });
    int failed = 0;
    lgt::run_checks(checks, opts, [&](const lgt::CheckResult& r) {
        if (!r.passed) ++failed;
        std::printf("%s criterion %s (%s) [%.1fs]: %s\n", r.passed ? "PASS" : "FAIL", r.id.c_str(), r.title.c_str(),
                    r.seconds, r.detail.c_str());
        std::fflush(stdout);
    });
    std::printf("%zu criteria, %d failed\n", checks.size(), failed);
    return strict && failed ? 1 : 0;
}
