#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace stripflow {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;  // measured quantities
    double seconds = 0.0;

    /// "PASS  3 kirchhoff-residual  <detail>"
    std::string line() const;
};

struct AcceptanceOptions {
    std::uint64_t seed = 20240601;
    unsigned threads = 1;
    std::vector<int> only;  // empty: all twelve
    /// Called after each criterion finishes.
    std::function<void(const CriterionResult&)> on_result;
};

int criterion_count();
std::string criterion_name(int id);

/// Runs one criterion. Errors thrown inside a criterion are reported as FAIL
/// with the message in `detail`.
CriterionResult run_criterion(int id, const AcceptanceOptions& options);

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

}  // namespace stripflow
