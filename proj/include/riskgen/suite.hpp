#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace riskgen {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    // measured quantities behind the verdict
    std::string detail;
    // supplementary measurements that do not enter the verdict
    std::vector<std::string> info;
    double seconds = 0.0;
    // runtime budget; exceeding it fails the criterion
    double limit = 0.0;
};

constexpr int kCriterionCount = 13;

CriterionResult run_criterion(int id);

// "PASS [id] name: detail (s / limit s)"
std::string format_result(const CriterionResult& r);

// runs the listed criteria (all when empty), printing each line to `log` as it finishes
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids = {}, std::ostream* log = nullptr);

}  // namespace riskgen
