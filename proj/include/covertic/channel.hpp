#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "covertic/prob.hpp"

namespace covertic {

/// Conditional distribution tensor: one probability row per joint input
/// tuple. Rows are indexed in mixed radix with user 1 slowest, matching the
/// on-disk nesting [x_1][x_2]...[x_K][output].
class CondTensor {
public:
    CondTensor() = default;
    CondTensor(std::vector<int> in_sizes, int out_size, std::vector<double> probs);

    const std::vector<int>& in_sizes() const { return in_sizes_; }
    int out_size() const { return out_size_; }
    std::size_t rows() const { return rows_; }

    std::size_t joint_index(std::span<const int> x) const;
    std::span<const double> row(std::size_t joint) const;
    std::span<const double> row(std::span<const int> x) const { return row(joint_index(x)); }

private:
    std::vector<int> in_sizes_;
    std::vector<std::size_t> strides_;
    int out_size_ = 0;
    std::size_t rows_ = 0;
    std::vector<double> p_;  // rows_ x out_size_, row-major
};

/// K-user discrete memoryless interference channel with J wardens.
/// Receiver channels are stored as per-receiver marginals; the joint law
/// over all receivers is never needed by anything here.
struct DmIcSpec {
    int K = 0;
    std::vector<int> input_sizes;     // m_k + 1 symbols per user, symbol 0 = "off"
    std::vector<CondTensor> rx;       // size K, outputs over Y_k
    std::vector<CondTensor> warden;   // size J >= 1, outputs over Z_j

    int J() const { return static_cast<int>(warden.size()); }
    bool binary() const;

    void validate() const;

    static DmIcSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    static DmIcSpec load_file(const std::string& path);
    void save_file(const std::string& path) const;

    // Frequently used single-letter slices.
    std::span<const double> rx_off(int k) const;                   // W_0^(k)
    std::span<const double> rx_single(int k, int sym) const;       // user k sends sym, rest off
    std::span<const double> warden_off(int j) const;               // Q_0^(j)
    std::span<const double> warden_single(int j, int k, int sym) const;
};

/// Sparse input weighting: allocation alpha on the K-simplex, per-user
/// symbol weights beta (row k over symbols 1..m_k), and the per-symbol
/// "on" probability scale gamma. Symbol i != 0 is sent with probability
/// alpha_k beta_ki gamma.
struct InputWeight {
    std::vector<double> alpha;
    std::vector<std::vector<double>> beta;
    double gamma = 0.0;

    static InputWeight binary(std::vector<double> alpha, double gamma);
    static InputWeight general(std::vector<double> alpha,
                               std::vector<std::vector<double>> beta, double gamma);

    int users() const { return static_cast<int>(alpha.size()); }
    double on_prob(int k) const { return alpha[k] * gamma; }
    double symbol_prob(int k, int sym) const;
    void validate_for(const DmIcSpec& spec) const;
};

struct PointDists {
    std::vector<Dist> rx;
    std::vector<Dist> warden;
};

/// Exact conditional output distributions at a fixed input tuple.
PointDists point_dists(const DmIcSpec& spec, std::span<const int> x);

/// TIN effective point-to-point channel for user pair k: the marginal of
/// Y_k given X_k with every other user averaged over its sparse input law.
CondTensor effective_channel(const DmIcSpec& spec, int k, const InputWeight& w);

/// Warden j's single-letter output distribution under product inputs.
Dist induced_warden_dist(const DmIcSpec& spec, int j, const InputWeight& w);

/// Chi-squared distance of the weighted single-user mixture from Q_0^(j).
double chi_squared(const DmIcSpec& spec, int j, std::span<const double> alpha,
                   const std::vector<std::vector<double>>* beta = nullptr);
double chi_squared_max(const DmIcSpec& spec, std::span<const double> alpha,
                       const std::vector<std::vector<double>>* beta = nullptr);

/// D(W_k^(k) || W_0^(k)), beta-weighted over symbols in the non-binary case.
double rx_divergence(const DmIcSpec& spec, int k,
                     std::span<const double> beta_row = {});
/// D(Q_k^(j) || Q_0^(j)) for warden j, beta-weighted over symbols.
double warden_divergence(const DmIcSpec& spec, int j, int k,
                         std::span<const double> beta_row = {});
double warden_divergence_max(const DmIcSpec& spec, int k,
                             std::span<const double> beta_row = {});

struct SandwichReport {
    double d_exact = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool holds = false;
};

/// Exact check of the second-order sandwich
///   (gamma^2/2)(1 -/+ sqrt(gamma)) chi^2 <= D(Q_{alpha,gamma} || Q_0).
/// The bound is asymptotic in nature, so `holds == false` is a reported
/// outcome, not an error.
SandwichReport check_lemma1_sandwich(const DmIcSpec& spec, int j, const InputWeight& w);

struct MutualInfoReport {
    double exact = 0.0;
    double first_order = 0.0;
};

/// I(X_U; Z_j) computed from the exact joint, alongside the first-order
/// approximation sum_{k in U} alpha_k gamma D(Q_k^(j) || Q_0^(j)).
MutualInfoReport mutual_info_warden(const DmIcSpec& spec, int j,
                                    std::span<const int> users, const InputWeight& w);

struct HullWitnessTerm {
    std::vector<int> tuple;
    double weight = 0.0;
};

struct HullCheck {
    bool in_hull = false;
    double distance = 0.0;  // Chebyshev distance from Q_0 to the hull
    std::vector<HullWitnessTerm> witness;
};

/// Is Q_0^(j) a convex combination of the active-tuple output distributions?
/// Solved as exact linear feasibility (tolerance 1e-9); |Z_j| = 2 uses the
/// closed-form interval check instead.
HullCheck hull_membership(const DmIcSpec& spec, int j);

struct AcViolation {
    int channel = 0;  // receiver k or warden j
    std::vector<int> tuple;
    int output_symbol = 0;
};

struct AssumptionReport {
    bool warden_ac_ok = true;
    bool rx_ac_ok = true;
    bool hull_ok = true;
    std::vector<AcViolation> warden_ac_violations;
    std::vector<AcViolation> rx_ac_violations;
    std::vector<HullCheck> hull;  // one per warden

    bool all_ok() const { return warden_ac_ok && rx_ac_ok && hull_ok; }
    nlohmann::json to_json() const;
};

/// Checks the standing assumptions: Q_x << Q_0 for every warden and tuple,
/// W_x^(k) << W_0^(k) for every receiver and tuple, and Q_0 outside the
/// convex hull of the active-tuple warden distributions. Always returns a
/// report; callers decide whether a violation is fatal.
AssumptionReport validate_assumptions(const DmIcSpec& spec);

/// K-user Gaussian IC with J wardens. gains[j][k] is the gain from Tx k to
/// Rx j; warden_gains[j][k] from Tx k to warden j.
struct GaussianIcSpec {
    int K = 0;
    std::vector<std::vector<double>> gains;
    std::vector<std::vector<double>> warden_gains;
    double sigma2 = 0.0;
    double power_cap = 0.0;

    int J() const { return static_cast<int>(warden_gains.size()); }
    void validate() const;
    static GaussianIcSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    static GaussianIcSpec load_file(const std::string& path);
    void save_file(const std::string& path) const;
};

/// lambda_j(alpha) = sum_k alpha_k g_{w_j k}^2 for one warden.
double gaussian_lambda(const GaussianIcSpec& spec, std::span<const double> alpha, int warden);
/// max_j lambda_j(alpha); equals the single-warden lambda when J = 1.
double gaussian_lambda(const GaussianIcSpec& spec, std::span<const double> alpha);

/// Random binary DM-IC with Dirichlet(1,...,1) rows, rejection-resampled
/// until validate_assumptions passes, so test corpora are reproducible from
/// the seed alone.
DmIcSpec random_binary_dmic(int K, int ny, int nz, int J, std::uint64_t seed);

namespace detail {
// Odometer over all joint input tuples; calls fn(x, joint_index).
template <typename Fn>
void for_each_tuple(std::span<const int> sizes, Fn&& fn) {
    std::vector<int> x(sizes.size(), 0);
    std::size_t joint = 0;
    for (;;) {
        fn(std::span<const int>(x), joint);
        ++joint;
        int pos = static_cast<int>(sizes.size()) - 1;
        while (pos >= 0 && ++x[pos] == sizes[pos]) x[pos--] = 0;
        if (pos < 0) break;
    }
}
}  // namespace detail

}  // namespace covertic
