#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "riskgen/suite.hpp"

// acceptance [id ...]; exits 1 when any listed criterion fails
int main(int argc, char** argv) {
    std::vector<int> ids;
    for (int k = 1; k < argc; ++k) ids.push_back(std::atoi(argv[k]));
    const auto results = riskgen::run_acceptance(ids, &std::cout);
    int failed = 0;
    for (const auto& r : results) failed += !r.pass;
    std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
    return failed ? 1 : 0;
}
