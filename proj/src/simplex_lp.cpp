#include "covertic/detail/simplex_lp.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace covertic::detail {

namespace {

constexpr double kPivotEps = 1e-11;

// One simplex phase on an explicit tableau. `costs` has size ncols; columns
// with index >= allowed_cols never enter the basis (used to lock artificials
// out during phase 2). Bland's rule throughout, so the iteration terminates.
void run_phase(std::vector<std::vector<double>>& t, std::vector<std::size_t>& basis,
               const std::vector<double>& costs, std::size_t allowed_cols) {
    const std::size_t m = basis.size();
    const std::size_t ncols = t[0].size() - 1;
    const std::size_t rhs = ncols;

    for (int iter = 0; iter < 20000; ++iter) {
        // Reduced costs from scratch; the systems are small enough that
        // recomputation beats maintaining an objective row.
        std::size_t entering = ncols;
        for (std::size_t j = 0; j < allowed_cols; ++j) {
            double r = costs[j];
            for (std::size_t i = 0; i < m; ++i) r -= costs[basis[i]] * t[i][j];
            if (r < -kPivotEps) {
                entering = j;
                break;  // Bland: smallest improving index
            }
        }
        if (entering == ncols) return;  // optimal

        std::size_t leaving = m;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            if (t[i][entering] > kPivotEps) {
                const double ratio = t[i][rhs] / t[i][entering];
                if (ratio < best_ratio - kPivotEps ||
                    (ratio < best_ratio + kPivotEps &&
                     (leaving == m || basis[i] < basis[leaving]))) {
                    best_ratio = ratio;
                    leaving = i;
                }
            }
        }
        if (leaving == m)
            throw std::logic_error("simplex: unbounded direction in bounded problem");

        // Pivot.
        const double piv = t[leaving][entering];
        for (double& v : t[leaving]) v /= piv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == leaving) continue;
            const double f = t[i][entering];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= ncols; ++j) t[i][j] -= f * t[leaving][j];
        }
        basis[leaving] = entering;
    }
    throw std::logic_error("simplex: iteration cap exceeded");
}

}  // namespace

LpResult solve_lp(std::vector<std::vector<double>> A, std::vector<double> b,
                  std::vector<double> c, double tol) {
    const std::size_t m = A.size();
    const std::size_t n = m ? A[0].size() : 0;
    if (b.size() != m || c.size() != n)
        throw std::invalid_argument("solve_lp: inconsistent dimensions");

    for (std::size_t i = 0; i < m; ++i) {
        if (b[i] < 0.0) {
            for (double& v : A[i]) v = -v;
            b[i] = -b[i];
        }
    }

    const std::size_t ncols = n + m;  // original vars + one artificial per row
    std::vector<std::vector<double>> t(m, std::vector<double>(ncols + 1, 0.0));
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) t[i][j] = A[i][j];
        t[i][n + i] = 1.0;
        t[i][ncols] = b[i];
        basis[i] = n + i;
    }

    // Phase 1: minimize the sum of artificials.
    std::vector<double> phase1(ncols, 0.0);
    for (std::size_t j = n; j < ncols; ++j) phase1[j] = 1.0;
    run_phase(t, basis, phase1, ncols);

    double infeas = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        if (basis[i] >= n) infeas += t[i][ncols];
    if (infeas > tol) return {false, infeas, {}};

    // Pivot surviving zero-level artificials out where a real column allows it.
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] < n) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(t[i][j]) > kPivotEps) {
                const double piv = t[i][j];
                for (double& v : t[i]) v /= piv;
                for (std::size_t r = 0; r < m; ++r) {
                    if (r == i) continue;
                    const double f = t[r][j];
                    if (f == 0.0) continue;
                    for (std::size_t col = 0; col <= ncols; ++col)
                        t[r][col] -= f * t[i][col];
                }
                basis[i] = j;
                break;
            }
        }
    }

    // Phase 2 on the real objective; artificial columns are locked out.
    std::vector<double> phase2(ncols, 0.0);
    for (std::size_t j = 0; j < n; ++j) phase2[j] = c[j];
    run_phase(t, basis, phase2, n);

    LpResult res;
    res.feasible = true;
    res.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (basis[i] < n) res.x[basis[i]] = t[i][ncols];
    res.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
    return res;
}

}  // namespace covertic::detail
