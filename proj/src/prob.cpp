#include "covertic/prob.hpp"

#include <cmath>
#include <string>

#include "covertic/errors.hpp"

namespace covertic {

namespace detail {

void normalize_simplex(std::vector<double>& v, const char* what) {
    if (v.empty()) throw SimplexViolation(std::string(what) + ": empty vector");
    double sum = 0.0;
    for (double& x : v) {
        if (x < 0.0) {
            if (x < -1e-12)
                throw SimplexViolation(std::string(what) + ": negative entry " +
                                       std::to_string(x));
            x = 0.0;
        }
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw SimplexViolation(std::string(what) + ": entries sum to " +
                               std::to_string(sum) + ", expected 1");
    for (double& x : v) x /= sum;
}

double kl_raw(std::span<const double> p, std::span<const double> q) {
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0)
            throw AbsoluteContinuityViolation(
                "kl_divergence: p has mass at index " + std::to_string(i) +
                " where q is zero");
        d += p[i] * std::log(p[i] / q[i]);
    }
    return d < 0.0 ? 0.0 : d;  // guard tiny negative rounding for p ~ q
}

double tv_raw(std::span<const double> p, std::span<const double> q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

bool ac_raw(std::span<const double> p, std::span<const double> q) {
    for (std::size_t i = 0; i < p.size(); ++i)
        if (q[i] == 0.0 && p[i] != 0.0) return false;
    return true;
}

}  // namespace detail

Dist::Dist(std::vector<double> probs) : p_(std::move(probs)) {
    detail::normalize_simplex(p_, "Dist");
}

static void require_same_alphabet(const Dist& p, const Dist& q, const char* op) {
    if (p.size() != q.size())
        throw AlphabetMismatch(std::string(op) + ": alphabet sizes " +
                               std::to_string(p.size()) + " vs " +
                               std::to_string(q.size()));
}

double kl_divergence(const Dist& p, const Dist& q) {
    require_same_alphabet(p, q, "kl_divergence");
    return detail::kl_raw(p.probs(), q.probs());
}

double total_variation(const Dist& p, const Dist& q) {
    require_same_alphabet(p, q, "total_variation");
    return detail::tv_raw(p.probs(), q.probs());
}

bool absolutely_continuous(const Dist& p, const Dist& q) {
    require_same_alphabet(p, q, "absolutely_continuous");
    return detail::ac_raw(p.probs(), q.probs());
}

double chi_squared_mixture(std::span<const Dist> components,
                           std::span<const double> weights, const Dist& q0) {
    if (components.empty() || components.size() != weights.size())
        throw InvalidArgument("chi_squared_mixture: need one weight per component");
    for (const Dist& c : components) {
        if (c.size() != q0.size())
            throw AlphabetMismatch("chi_squared_mixture: component alphabet " +
                                   std::to_string(c.size()) + " vs q0 " +
                                   std::to_string(q0.size()));
        if (!detail::ac_raw(c.probs(), q0.probs()))
            throw AbsoluteContinuityViolation(
                "chi_squared_mixture: component not absolutely continuous wrt q0");
    }
    std::vector<double> w(weights.begin(), weights.end());
    detail::normalize_simplex(w, "chi_squared_mixture weights");

    double chi2 = 0.0;
    for (std::size_t z = 0; z < q0.size(); ++z) {
        double mix = 0.0;
        for (std::size_t k = 0; k < components.size(); ++k)
            mix += w[k] * components[k][z];
        const double diff = mix - q0[z];
        if (q0[z] == 0.0) {
            if (mix != 0.0)
                throw AbsoluteContinuityViolation(
                    "chi_squared_mixture: mixture has mass where q0 is zero");
            continue;
        }
        chi2 += diff * diff / q0[z];
    }
    return chi2;
}

}  // namespace covertic
