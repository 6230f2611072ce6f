#include "covertic/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "covertic/errors.hpp"
#include "covertic/rng.hpp"

namespace covertic {

using nlohmann::json;

namespace {

constexpr double kChiZeroTol = 1e-18;  // below this chi^2 is treated as exactly zero
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<std::vector<double>> normalized_beta(const DmIcSpec& spec,
                                                 const std::vector<std::vector<double>>* beta) {
    std::vector<std::vector<double>> b;
    if (beta) {
        b = *beta;
        if (static_cast<int>(b.size()) != spec.K)
            throw InvalidArgument("region: need one beta row per user");
        for (int k = 0; k < spec.K; ++k) {
            if (static_cast<int>(b[k].size()) != spec.input_sizes[k] - 1)
                throw InvalidArgument("region: beta row length mismatch");
            detail::normalize_simplex(b[k], "region beta row");
        }
    } else {
        if (!spec.binary())
            throw InvalidArgument("region: non-binary spec needs beta weights");
        b.assign(spec.K, {1.0});
    }
    return b;
}

}  // namespace

json RegionPoint::to_json() const {
    json j;
    j["alpha"] = alpha;
    if (!beta.empty()) j["beta"] = beta;
    j["rates"] = rates;
    if (!key_lengths.empty()) j["key_lengths"] = key_lengths;
    if (!std::isnan(chi2)) j["chi2"] = chi2;
    if (!std::isnan(lambda)) j["lambda"] = lambda;
    return j;
}

RegionPoint region_point(const DmIcSpec& spec, std::span<const double> alpha,
                         const std::vector<std::vector<double>>* beta) {
    AssumptionReport rep = validate_assumptions(spec);
    if (!rep.all_ok())
        throw AssumptionViolation("region_point: standing assumptions violated: " +
                                  rep.to_json().dump());

    std::vector<double> a(alpha.begin(), alpha.end());
    if (static_cast<int>(a.size()) != spec.K)
        throw InvalidArgument("region_point: alpha length != K");
    detail::normalize_simplex(a, "region alpha");
    auto b = normalized_beta(spec, beta);

    const double chi2 = chi_squared_max(spec, a, &b);
    if (chi2 < kChiZeroTol)
        throw DegenerateChiSquared("region_point: chi^2(alpha) = 0, rates are not finite");
    const double denom = std::sqrt(chi2 / 2.0);

    RegionPoint pt;
    pt.alpha = a;
    if (beta) pt.beta = b;
    pt.chi2 = chi2;
    pt.rates.resize(spec.K);
    pt.key_lengths.resize(spec.K);
    for (int k = 0; k < spec.K; ++k) {
        const double d_rx = rx_divergence(spec, k, b[k]);
        const double d_w = warden_divergence_max(spec, k, b[k]);
        pt.rates[k] = a[k] * d_rx / denom;
        pt.key_lengths[k] = a[k] * std::max(d_w - d_rx, 0.0) / denom;
    }
    return pt;
}

RegionPoint region_point_gaussian(const GaussianIcSpec& spec, std::span<const double> alpha) {
    spec.validate();
    std::vector<double> a(alpha.begin(), alpha.end());
    if (static_cast<int>(a.size()) != spec.K)
        throw InvalidArgument("region_point_gaussian: alpha length != K");
    detail::normalize_simplex(a, "region alpha");

    const double lam = gaussian_lambda(spec, a);
    if (lam < kChiZeroTol)
        throw DegenerateChiSquared(
            "region_point_gaussian: lambda(alpha) = 0, all active warden gains vanish");

    RegionPoint pt;
    pt.alpha = a;
    pt.lambda = lam;
    pt.rates.resize(spec.K);
    for (int k = 0; k < spec.K; ++k) {
        const double g = spec.gains[k][k];
        pt.rates[k] = a[k] * g * g / lam;
    }
    return pt;
}

// ---------------------------------------------------------------------------
// Frontier search

namespace {

// Scalarized objective with the assumption check hoisted out of the loop.
class Objective {
public:
    Objective(const DmIcSpec& spec, std::span<const double> weights)
        : spec_(spec), u_(weights.begin(), weights.end()) {
        if (static_cast<int>(u_.size()) != spec.K)
            throw InvalidArgument("pareto_frontier: weights length != K");
        bool any = false;
        for (double w : u_) {
            if (w < 0.0) throw InvalidArgument("pareto_frontier: weights must be >= 0");
            if (w > 0.0) any = true;
        }
        if (!any) throw InvalidArgument("pareto_frontier: weights must not all vanish");
    }

    // Returns -inf when chi^2 degenerates at this allocation.
    double operator()(std::span<const double> alpha,
                      const std::vector<std::vector<double>>& beta) const {
        double chi2 = 0.0;
        for (int j = 0; j < spec_.J(); ++j) {
            const int nz = spec_.warden[j].out_size();
            auto q0 = spec_.warden_off(j);
            double c = 0.0;
            for (int z = 0; z < nz; ++z) {
                double mix = 0.0;
                for (int k = 0; k < spec_.K; ++k)
                    for (int sym = 1; sym < spec_.input_sizes[k]; ++sym)
                        mix += alpha[k] * beta[k][sym - 1] *
                               spec_.warden_single(j, k, sym)[z];
                const double diff = mix - q0[z];
                if (q0[z] == 0.0) continue;  // AC validated up front
                c += diff * diff / q0[z];
            }
            chi2 = std::max(chi2, c);
        }
        if (chi2 < kChiZeroTol) return kNegInf;
        const double denom = std::sqrt(chi2 / 2.0);
        double val = 0.0;
        for (int k = 0; k < spec_.K; ++k) {
            if (u_[k] == 0.0 || alpha[k] == 0.0) continue;
            val += u_[k] * alpha[k] * rx_divergence(spec_, k, beta[k]) / denom;
        }
        return val;
    }

private:
    const DmIcSpec& spec_;
    std::vector<double> u_;
};

std::vector<std::vector<double>> simplex_grid(int dims, int resolution) {
    std::vector<std::vector<double>> pts;
    // Enumerate compositions of `resolution` into `dims` parts.
    std::vector<int> c(dims, 0);
    c[dims - 1] = resolution;
    for (;;) {
        std::vector<double> a(dims);
        for (int i = 0; i < dims; ++i) a[i] = static_cast<double>(c[i]) / resolution;
        pts.push_back(std::move(a));
        // next composition in colex order
        int i = dims - 1;
        while (i > 0 && c[i] == 0) --i;
        if (i == 0) break;
        const int rest = c[i] - 1;
        ++c[i - 1];
        c[i] = 0;
        c[dims - 1] = rest;
    }
    return pts;
}

// Best mass-transfer move of size `step`; deterministic scan order.
template <typename Eval>
bool descend_simplex(std::vector<double>& x, double& cur, Eval&& eval, double step,
                     double rel_tol, bool& converged) {
    const int n = static_cast<int>(x.size());
    double best_val = cur;
    int best_from = -1, best_to = -1;
    double best_t = 0.0;
    for (int from = 0; from < n; ++from) {
        if (x[from] <= 0.0) continue;
        const double t = std::min(step, x[from]);
        for (int to = 0; to < n; ++to) {
            if (to == from) continue;
            x[from] -= t;
            x[to] += t;
            const double v = eval(x);
            x[from] += t;
            x[to] -= t;
            if (v > best_val) {
                best_val = v;
                best_from = from;
                best_to = to;
                best_t = t;
            }
        }
    }
    if (best_from < 0) return false;
    x[best_from] -= best_t;
    x[best_to] += best_t;
    const double gain = best_val - cur;
    converged = std::isfinite(cur) && gain <= rel_tol * std::max(1.0, std::abs(cur));
    cur = best_val;
    return true;
}

}  // namespace

FrontierResult pareto_frontier(const DmIcSpec& spec, std::span<const double> weights,
                               const FrontierOptions& options) {
    AssumptionReport rep = validate_assumptions(spec);
    if (!rep.all_ok())
        throw AssumptionViolation("pareto_frontier: standing assumptions violated: " +
                                  rep.to_json().dump());
    Objective obj(spec, weights);

    const bool binary = spec.binary();
    std::vector<std::vector<double>> beta(spec.K);
    for (int k = 0; k < spec.K; ++k) {
        const int m = spec.input_sizes[k] - 1;
        beta[k].assign(m, 1.0 / m);  // uniform start; refined by alternation
    }

    FrontierResult res;
    const auto grid = simplex_grid(spec.K, std::max(options.grid_resolution, 1));
    std::vector<double> values(grid.size());
    const std::int64_t npts = static_cast<std::int64_t>(grid.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (options.parallel)
#endif
    for (std::int64_t i = 0; i < npts; ++i) values[i] = obj(grid[i], beta);

    std::size_t best_idx = 0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (values[i] > values[best_idx]) best_idx = i;
    res.trace.reserve(grid.size() + options.max_iterations + 1);
    for (std::size_t i = 0; i < grid.size(); ++i)
        res.trace.push_back({'g', grid[i], values[i], std::isfinite(values[i])});
    if (!std::isfinite(values[best_idx]))
        throw NoFeasibleAllocation(
            "pareto_frontier: chi^2 degenerates at every grid allocation");

    std::vector<double> alpha = grid[best_idx];
    double cur = values[best_idx];

    const double init_step = 1.0 / std::max(options.grid_resolution, 1);
    const int rounds = binary ? 1 : std::max(options.alternating_rounds, 1);
    for (int round = 0; round < rounds; ++round) {
        // Alpha descent at fixed beta.
        double step = init_step;
        for (int it = 0; it < options.max_iterations; ++it) {
            bool converged = false;
            const bool moved = descend_simplex(
                alpha, cur, [&](const std::vector<double>& a) { return obj(a, beta); }, step,
                options.rel_improvement_tol, converged);
            if (moved) {
                res.trace.push_back({'r', alpha, cur, true});
                if (converged) break;
            } else {
                step *= options.step_shrink;
                if (step < 1e-14) break;
            }
        }
        if (binary) break;
        // Each beta row over its own sub-simplex at fixed alpha.
        for (int k = 0; k < spec.K; ++k) {
            if (beta[k].size() <= 1) continue;
            double bstep = 0.25;
            for (int it = 0; it < options.max_iterations; ++it) {
                bool converged = false;
                const bool moved = descend_simplex(
                    beta[k], cur,
                    [&](const std::vector<double>&) { return obj(alpha, beta); }, bstep,
                    options.rel_improvement_tol, converged);
                if (moved) {
                    res.trace.push_back({'b', alpha, cur, true});
                    if (converged) break;
                } else {
                    bstep *= options.step_shrink;
                    if (bstep < 1e-14) break;
                }
            }
        }
    }

    res.alpha = alpha;
    if (!binary) res.beta = beta;
    res.objective = cur;
    res.point = region_point(spec, alpha, binary ? nullptr : &beta);
    return res;
}

bool symmetric_warden_check(const DmIcSpec& spec) {
    if (!spec.binary())
        throw InvalidArgument("symmetric_warden_check: stated for binary-input specs");
    for (int j = 0; j < spec.J(); ++j) {
        auto q1 = spec.warden_single(j, 0, 1);
        for (int k = 1; k < spec.K; ++k) {
            auto qk = spec.warden_single(j, k, 1);
            for (int z = 0; z < spec.warden[j].out_size(); ++z)
                if (std::abs(qk[z] - q1[z]) > 1e-12) return false;
        }
    }
    // Symmetry implies chi^2 is flat in alpha; spot-check it.
    std::mt19937_64 rng(0x5eed);
    for (int j = 0; j < spec.J(); ++j) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int s = 0; s < 10; ++s) {
            std::vector<double> a(spec.K);
            double sum = 0.0;
            for (double& v : a) {
                v = -std::log(1.0 - uniform01(rng));
                sum += v;
            }
            for (double& v : a) v /= sum;
            const double c = chi_squared(spec, j, a);
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
        if (hi - lo > 1e-12)
            throw std::logic_error("symmetric_warden_check: chi^2 varied under symmetry");
    }
    return true;
}

}  // namespace covertic
