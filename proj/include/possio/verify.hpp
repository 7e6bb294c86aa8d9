#pragma once

// Property suites run by `possio verify`. Each check records its measured
// value, the tolerance and the comparison; advisory checks are reported but
// do not decide the exit status.

#include "possio/flowconfig.hpp"

#include <string>
#include <vector>

namespace possio::verify {

enum class Compare { less, greater_equal, equal };

struct CheckResult {
    std::string suite;
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    Compare compare = Compare::less;
    bool passed = false;
    bool advisory = false;
    std::string detail;
};

struct SuiteResult {
    std::string suite;
    double seconds = 0.0;
    std::vector<CheckResult> checks;
};

struct VerifyOptions {
    FlowParams params = derive_params(340.0, 0.5);
    std::size_t n = 64;  ///< grid size for the operator and field suites
};

const std::vector<std::string>& known_suites();

/// Expands "all", rejects unknown names with ConfigError, keeps first-seen order.
std::vector<std::string> resolve_suites(const std::vector<std::string>& names);

SuiteResult run_suite(const std::string& name, const VerifyOptions& opt);

std::vector<SuiteResult> run_suites(const std::vector<std::string>& names, const VerifyOptions& opt);

/// True when every non-advisory check passed.
bool all_passed(const std::vector<SuiteResult>& results);

}  // namespace possio::verify
