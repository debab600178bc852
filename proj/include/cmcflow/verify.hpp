// Cross-module invariant suite behind the `verify` command: every check pins
// its own threshold and reports the measured value next to it.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cmcflow {

struct CheckResult {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::string detail;
};

/**
 * Runs every invariant check whose name contains `filter` (all of them when
 * `filter` is empty). `tol_override`, when set, replaces each check's pinned
 * threshold — passing 0 demonstrates that the suite actually measures
 * something. Randomized checks draw from `seed`.
 */
std::vector<CheckResult> run_verification(std::uint64_t seed,
                                          std::optional<double> tol_override,
                                          const std::string& filter);

}  // namespace cmcflow
