#pragma once

#include <string>
#include <vector>

#include "kmc/engine.hpp"

namespace kmc {
namespace selftest {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Quadrature-identity and invariant checks (fast, deterministic).
std::vector<CheckResult> run_fast();

// Statistical acceptance checks at desk scale (several minutes of work at
// most); `workers` bounds the thread count of the embedded Monte Carlo runs.
std::vector<CheckResult> run_full(int workers);

// Fast + full, with the acceptance criteria numbered in the result names.
std::vector<CheckResult> run_all(int workers);

bool all_passed(const std::vector<CheckResult>& results);

} // namespace selftest
} // namespace kmc
