#pragma once

#include <span>
#include <vector>

namespace covertic {

/// Probability distribution on a finite alphabet.
///
/// Construction accepts vectors whose entries sum to 1 within 1e-9 and
/// renormalizes them silently; anything further off (or meaningfully
/// negative) raises SimplexViolation. After construction the entries are
/// nonnegative and sum to 1 within 1e-12.
class Dist {
public:
    Dist() = default;
    explicit Dist(std::vector<double> probs);

    std::size_t size() const { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    std::span<const double> probs() const { return p_; }

private:
    std::vector<double> p_;
};

/// D(p || q) in nats, with the 0 log 0 = 0 convention.
/// Throws AbsoluteContinuityViolation if p(x) > 0 where q(x) = 0.
double kl_divergence(const Dist& p, const Dist& q);

/// Total variation distance (1/2) sum |p - q|, in [0, 1].
double total_variation(const Dist& p, const Dist& q);

/// True iff q(x) = 0 implies p(x) = 0 for every x (p << q).
bool absolutely_continuous(const Dist& p, const Dist& q);

/// Chi-squared distance between a weighted mixture of components and q0:
///   sum_z (sum_k w_k Q_k(z) - q0(z))^2 / q0(z).
/// Points with q0(z) = 0 are skipped only when the mixture assigns 0 there;
/// otherwise AbsoluteContinuityViolation. Weights must lie on the simplex
/// (1e-9 tolerance, renormalized silently).
double chi_squared_mixture(std::span<const Dist> components,
                           std::span<const double> weights, const Dist& q0);

/// All divergences in this library are in nats; this converts for reporting.
inline double nats_to_bits(double nats) { return nats * 1.4426950408889634074; }

namespace detail {

// Span-level kernels used by the channel/warden layers where the operands
// are already known-valid distributions.
double kl_raw(std::span<const double> p, std::span<const double> q);
double tv_raw(std::span<const double> p, std::span<const double> q);
bool ac_raw(std::span<const double> p, std::span<const double> q);

// Validates nonnegativity and normalization (1e-9), renormalizes in place.
void normalize_simplex(std::vector<double>& v, const char* what);

}  // namespace detail

}  // namespace covertic
