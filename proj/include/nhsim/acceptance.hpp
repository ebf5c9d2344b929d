#pragma once

// The fixed acceptance suite: eleven numbered criteria grouped into suites.

#include <string>
#include <utility>
#include <vector>

namespace nhsim::acceptance {

struct CriterionResult {
    int id = 0;
    std::string name;
    std::string suite;
    bool checks_passed = false;
    std::string detail;
    double seconds = 0.0;
    double budget = 0.0; // seconds
    std::vector<std::pair<std::string, std::string>> digests; // artifact -> sha256

    bool within_budget() const { return seconds < budget; }
    bool pass() const { return checks_passed && within_budget(); }
};

/// spectra, elimination, phase, modal, biorthogonal, sync, dip, chaos, determinism, all
const std::vector<std::string>& suite_names();

/// Criterion ids belonging to a suite; throws ConfigError for unknown names.
std::vector<int> suite_criteria(const std::string& suite);

/// Runs one of criteria 1-10. Criterion 11 needs the others; use run_suite.
CriterionResult run_criterion(int id);

/// Runs the suite's criteria in order. Criterion 11 reruns 1-10 (reusing any
/// first pass already made in this call) and compares artifact digests.
std::vector<CriterionResult> run_suite(const std::string& suite);

/// One line: criterion=<id> suite=... name=... status=pass|fail seconds=... budget=... detail="..."
std::string summary_line(const CriterionResult& r);

} // namespace nhsim::acceptance
