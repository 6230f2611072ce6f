#pragma once

#include <vector>

namespace covertic::detail {

struct LpResult {
    bool feasible = false;
    double objective = 0.0;
    std::vector<double> x;
};

/// Minimize c.x subject to A x = b, x >= 0.
///
/// Two-phase dense tableau simplex with Bland's rule. Sized for the tiny
/// systems this library produces (hull membership over at most a few dozen
/// variables); not a general-purpose LP code.
LpResult solve_lp(std::vector<std::vector<double>> A, std::vector<double> b,
                  std::vector<double> c, double tol = 1e-9);

}  // namespace covertic::detail
