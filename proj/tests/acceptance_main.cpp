// Release gate: evaluates the twelve acceptance criteria and prints one
// pass/fail line per criterion, with per-sub-check measurements indented.

#include <cstdio>

#include "metrology/acceptance.hpp"

int main() {
    const auto results = metrology::run_acceptance();
    bool all_pass = true;
    for (int crit = 1; crit <= 12; ++crit) {
        bool pass = true;
        for (const auto& r : results)
            if (r.criterion == crit && !r.pass) pass = false;
        std::printf("criterion %2d: %s\n", crit, pass ? "PASS" : "FAIL");
        for (const auto& r : results)
            if (r.criterion == crit)
                std::printf("    [%s] %s: measured %.6g, target %.6g"
                            " (tol %.3g)\n",
                            r.pass ? "ok" : "MISS", r.name.c_str(),
                            r.measured, r.target, r.tolerance);
        all_pass = all_pass && pass;
    }
    std::printf("overall: %s\n", all_pass ? "PASS" : "FAIL");
    return all_pass ? 0 : 1;
}
