#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "covertic/channel.hpp"
#include "covertic/stats.hpp"

namespace covertic {

/// Blocklength/rate/key/threshold schedule for one experiment.
///
/// gamma is derived from the covertness budget delta by inverting the
/// second-order covertness bound at leading order, message counts follow the
/// reliability sizing at backoff (1 - epsilon), and combined message-key
/// counts follow the resolvability sizing at margin (1 + epsilon).
struct Schedule {
    std::int64_t n = 0;
    InputWeight weight;  // allocation plus the derived gamma_n
    std::vector<std::uint64_t> M;
    std::vector<std::uint64_t> J;
    std::vector<double> log_M;   // ln M_k after integer rounding
    std::vector<double> log_MJ;  // ln (M_k J_k)
    std::vector<double> tau;
    double epsilon = 0.0;
    double epsilon_resolvability = 0.0;
    double delta = 0.0;
    std::optional<std::uint64_t> seed;

    double gamma() const { return weight.gamma; }

    nlohmann::json to_json() const;
    static Schedule from_json(const nlohmann::json& j);
    static Schedule load_file(const std::string& path);
    void save_file(const std::string& path) const;
};

/// Builds the schedule at allocation alpha (and symbol weights beta for
/// non-binary specs). Throws InfeasibleSchedule when the covertness budget
/// cannot be realized within a factor of two, or when an active user's
/// message count rounds below 2. Throws ScaleGuardExceeded when counts do
/// not fit in 62 bits (beyond desk scale).
Schedule make_schedule(const DmIcSpec& spec, std::span<const double> alpha,
                       const std::vector<std::vector<double>>* beta, std::int64_t n,
                       double epsilon, double delta,
                       std::optional<double> resolvability_epsilon = {});

/// One user's M*J codewords in sparse form: only the non-"off" symbols are
/// stored. Codeword (w, s) lives at index s * M + w.
struct SparseCodebook {
    std::uint64_t count = 0;
    std::vector<std::uint64_t> offsets;  // count + 1 entries
    std::vector<std::uint32_t> positions;
    std::vector<std::uint8_t> symbols;

    std::span<const std::uint32_t> cw_positions(std::uint64_t cw) const {
        return {positions.data() + offsets[cw],
                static_cast<std::size_t>(offsets[cw + 1] - offsets[cw])};
    }
    std::span<const std::uint8_t> cw_symbols(std::uint64_t cw) const {
        return {symbols.data() + offsets[cw],
                static_cast<std::size_t>(offsets[cw + 1] - offsets[cw])};
    }
    std::uint64_t entries() const { return positions.size(); }
};

struct CodebookSet {
    Schedule schedule;
    std::uint64_t seed = 0;
    std::vector<SparseCodebook> users;

    std::uint64_t codeword_index(int k, std::uint64_t w, std::uint64_t s) const {
        return s * schedule.M[k] + w;
    }
};

/// I.i.d. low-weight codebooks: each symbol is 0 with probability
/// 1 - alpha_k gamma and symbol i with probability alpha_k beta_ki gamma.
/// Bit-identical for a given (spec, schedule, seed) regardless of scale,
/// since every codeword owns a counter-derived generator.
CodebookSet generate_codebooks(const DmIcSpec& spec, const Schedule& schedule,
                               std::uint64_t seed);

/// TIN threshold decoder for user pair k. Decodes to the unique message
/// whose log-likelihood-ratio statistic against the effective channel
/// exceeds tau_k; anything else (no candidate, or a collision) is NoDecode,
/// reported as nullopt.
std::optional<std::uint64_t> tin_decode(const DmIcSpec& spec, int k,
                                        std::span<const std::uint8_t> y,
                                        const CodebookSet& codebooks, std::uint64_t key);

/// Per-message decoder statistics T(x_w) for the given key slice.
std::vector<double> tin_statistics(const DmIcSpec& spec, int k,
                                   std::span<const std::uint8_t> y,
                                   const CodebookSet& codebooks, std::uint64_t key);

struct ErrorRateReport {
    std::uint64_t trials = 0;
    std::vector<std::uint64_t> per_user_errors;
    std::uint64_t union_errors = 0;
    std::vector<WilsonInterval> per_user_ci;
    WilsonInterval union_ci;

    double union_rate() const {
        return trials ? static_cast<double>(union_errors) / trials : 0.0;
    }
    double user_rate(int k) const {
        return trials ? static_cast<double>(per_user_errors[k]) / trials : 0.0;
    }
    nlohmann::json to_json() const;
};

/// Monte Carlo link-level simulation: every trial draws fresh messages and
/// keys, pushes the joint input tuple through each receiver marginal, and
/// decodes all K users. Trials use counter-derived seeds, so tallies are
/// identical for any worker count.
ErrorRateReport simulate_error_rate(const DmIcSpec& spec, const CodebookSet& codebooks,
                                    std::uint64_t trials, std::uint64_t seed);

/// Plain-loop reference implementation of the same simulation; kept for
/// testing the parallel kernel against and for the benchmark target.
ErrorRateReport simulate_error_rate_serial(const DmIcSpec& spec,
                                           const CodebookSet& codebooks,
                                           std::uint64_t trials, std::uint64_t seed);

}  // namespace covertic
