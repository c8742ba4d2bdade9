#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rsf/symbols.hpp"

namespace rsf::verify {

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct Options {
    // Replaces the degree configuration of the parabolic count checks (fault injection).
    std::optional<DegreeConfig> degree_override;
    // Perturbs one oracle value so the signature check must fail.
    bool inject_signature_fault = false;
    int workers = 1;
};

// Symbol counts of the worked examples and experiment presets.
std::vector<Check> count_checks(const Options& opts = {});
Check signature_oracle_check(const Options& opts = {}, int paths = 20);
// Eigenmode decay/oscillation against the semi-discrete closed forms, with the observed
// convergence order under time refinement.
Check heat_eigenmode_check();
Check wave_eigenmode_check();
Check operator_linearity_check();
Check multilinearity_check();
Check memoization_check();
Check ols_nested_check();
Check picard_span_check();
Check rollout_closure_check();

std::vector<Check> run_all(const Options& opts = {});

// Named list used by the CLI; each entry runs one or more checks.
struct Suite {
    std::string name;
    std::function<std::vector<Check>(const Options&)> run;
};
std::vector<Suite> suites();

}  // namespace rsf::verify
