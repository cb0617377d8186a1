#include <cstdlib>
#include <iostream>
#include <string>

#include "rfio/experiments.hpp"

// Acceptance suite: one pass/fail line per criterion. With an argument it
// runs a single criterion (the ctest registration); without, the full
// battery.

int main(int argc, char** argv) {
    int lo = 1, hi = rfio::acceptance_criteria_count();
    if (argc > 1) lo = hi = std::atoi(argv[1]);
    if (lo < 1 || hi > rfio::acceptance_criteria_count()) {
        std::cerr << "criterion index out of range\n";
        return 1;
    }
    int failures = 0;
    for (int k = lo; k <= hi; ++k) {
        rfio::CriterionResult res;
        try {
            res = rfio::run_acceptance_criterion(k, "acceptance_out", 20240817ull);
        } catch (const std::exception& e) {
            std::cout << "FAIL criterion " << k << ": exception: " << e.what() << "\n";
            ++failures;
            continue;
        }
        std::cout << (res.pass ? "PASS" : "FAIL") << " criterion " << k << ": " << res.name
                  << "\n";
        for (const auto& d : res.details) std::cout << "    " << d << "\n";
        if (!res.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
