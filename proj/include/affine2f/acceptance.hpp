#pragma once

#include <functional>
#include <string>
#include <vector>

namespace affine2f {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    /// Criterion whose reference values are scaled by (1 + kMutationSize); 0 disables.
    int mutate = 0;
    unsigned threads = 0;
    /// Restrict to these ids; empty runs all.
    std::vector<int> only;
};

inline constexpr double kMutationSize = 0.10;
inline constexpr int kCriterionCount = 12;

/// Runs the acceptance criteria in order, reporting each result to `on_result` as it finishes.
std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& opt,
    const std::function<void(const CriterionResult&)>& on_result = {});

std::string format_result(const CriterionResult& r);

}  // namespace affine2f
