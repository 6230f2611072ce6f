#pragma once

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "covertic/channel.hpp"

namespace covertic {

/// One point of the covert capacity region: per-user rates and key lengths
/// in the normalized unit log M / sqrt(n D) (nats). Exactly one of chi2 /
/// lambda is meaningful depending on whether the spec is discrete or
/// Gaussian.
struct RegionPoint {
    std::vector<double> alpha;
    std::vector<std::vector<double>> beta;  // empty for binary inputs
    std::vector<double> rates;
    std::vector<double> key_lengths;
    double chi2 = std::numeric_limits<double>::quiet_NaN();
    double lambda = std::numeric_limits<double>::quiet_NaN();

    nlohmann::json to_json() const;
};

/// Rate and key-length tuple at a fixed allocation. Requires the standing
/// assumptions to hold (throws AssumptionViolation otherwise) and a
/// non-degenerate chi-squared (throws DegenerateChiSquared at chi^2 = 0).
RegionPoint region_point(const DmIcSpec& spec, std::span<const double> alpha,
                         const std::vector<std::vector<double>>* beta = nullptr);

RegionPoint region_point_gaussian(const GaussianIcSpec& spec, std::span<const double> alpha);

/// Converts a normalized rate to nats per channel use at covertness budget
/// delta and blocklength n.
inline double rate_per_channel_use(double normalized_rate, double delta, double n) {
    return normalized_rate * std::sqrt(delta / n);
}

struct FrontierOptions {
    int grid_resolution = 50;    // coarse grid cells per simplex coordinate
    int max_iterations = 200;    // refinement iterations
    double step_shrink = 0.5;
    double rel_improvement_tol = 1e-10;
    int alternating_rounds = 4;  // alpha/beta alternations (non-binary only)
    bool parallel = true;        // OpenMP over grid points
};

struct FrontierTraceEntry {
    char phase = 'g';  // 'g' grid, 'r' alpha refinement, 'b' beta refinement
    std::vector<double> alpha;
    double value = 0.0;
    bool feasible = true;
};

struct FrontierResult {
    std::vector<double> alpha;
    std::vector<std::vector<double>> beta;  // empty for binary inputs
    RegionPoint point;
    double objective = 0.0;
    std::vector<FrontierTraceEntry> trace;
};

/// Maximizes sum_k u_k R_k(alpha[, B]) over the allocation simplex by a
/// coarse grid scan followed by projected coordinate descent (mass-transfer
/// moves between coordinates). Non-binary specs alternate between alpha and
/// the rows of B. No global-optimality claim is made; the result is never
/// worse than any grid point evaluated.
FrontierResult pareto_frontier(const DmIcSpec& spec, std::span<const double> weights,
                               const FrontierOptions& options = {});

/// True iff every warden sees identical single-user distributions
/// (Q_k^(j) independent of k, tolerance 1e-12), in which case chi^2 does
/// not depend on alpha and time division is optimal.
bool symmetric_warden_check(const DmIcSpec& spec);

}  // namespace covertic
