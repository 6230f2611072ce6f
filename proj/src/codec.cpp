#include "covertic/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "covertic/errors.hpp"
#include "covertic/rng.hpp"

namespace covertic {

using nlohmann::json;

namespace {

constexpr std::uint64_t kCountCap = std::uint64_t{1} << 62;
constexpr double kLogCountCap = 42.975125194716609;  // ln(2^62)
constexpr std::uint64_t kMaxArenaEntries = 250'000'000;
constexpr std::uint64_t kCodewordTag = 0xc0de;
constexpr std::uint64_t kTrialTag = 0x517a;

std::vector<std::vector<double>> resolve_beta(const DmIcSpec& spec,
                                              const std::vector<std::vector<double>>* beta) {
    std::vector<std::vector<double>> b;
    if (beta) {
        b = *beta;
        if (static_cast<int>(b.size()) != spec.K)
            throw InvalidArgument("make_schedule: need one beta row per user");
        for (int k = 0; k < spec.K; ++k) {
            if (static_cast<int>(b[k].size()) != spec.input_sizes[k] - 1)
                throw InvalidArgument("make_schedule: beta row length mismatch");
            detail::normalize_simplex(b[k], "schedule beta row");
        }
    } else {
        if (!spec.binary())
            throw InvalidArgument("make_schedule: non-binary spec needs beta weights");
        b.assign(spec.K, {1.0});
    }
    return b;
}

}  // namespace

// ---------------------------------------------------------------------------
// Schedule

Schedule make_schedule(const DmIcSpec& spec, std::span<const double> alpha,
                       const std::vector<std::vector<double>>* beta, std::int64_t n,
                       double epsilon, double delta,
                       std::optional<double> resolvability_epsilon) {
    AssumptionReport rep = validate_assumptions(spec);
    if (!rep.all_ok())
        throw AssumptionViolation("make_schedule: standing assumptions violated: " +
                                  rep.to_json().dump());
    if (n < 1) throw InvalidArgument("make_schedule: n must be >= 1");
    if (n > (std::int64_t{1} << 31))
        throw ScaleGuardExceeded("make_schedule: blocklength beyond 2^31", double(n));
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw InvalidArgument("make_schedule: epsilon must lie in (0, 1)");
    const double eps_res = resolvability_epsilon.value_or(epsilon);
    if (!(eps_res > 0.0 && eps_res < 1.0))
        throw InvalidArgument("make_schedule: resolvability epsilon must lie in (0, 1)");
    if (!(delta > 0.0)) throw InvalidArgument("make_schedule: delta must be positive");

    std::vector<double> a(alpha.begin(), alpha.end());
    if (static_cast<int>(a.size()) != spec.K)
        throw InvalidArgument("make_schedule: alpha length != K");
    detail::normalize_simplex(a, "schedule alpha");
    auto b = resolve_beta(spec, beta);

    const double chi2 = chi_squared_max(spec, a, &b);
    if (chi2 < 1e-18)
        throw DegenerateChiSquared("make_schedule: chi^2(alpha) = 0");

    const double gamma_raw = std::sqrt(2.0 * delta / (static_cast<double>(n) * chi2));
    const double gamma = std::min(gamma_raw, 1.0);
    const double implied_d = 0.5 * static_cast<double>(n) * gamma * gamma * chi2;
    if (implied_d < 0.5 * delta)
        throw InfeasibleSchedule(
            "make_schedule: gamma clipped to 1 undershoots the covertness budget by more "
            "than 2x (implied D = " + std::to_string(implied_d) + ", delta = " +
            std::to_string(delta) + ")");

    Schedule s;
    s.n = n;
    s.weight = spec.binary() && !beta ? InputWeight::binary(a, gamma)
                                      : InputWeight::general(a, b, gamma);
    s.epsilon = epsilon;
    s.epsilon_resolvability = eps_res;
    s.delta = delta;
    s.M.resize(spec.K);
    s.J.resize(spec.K);
    s.log_M.resize(spec.K);
    s.log_MJ.resize(spec.K);
    s.tau.resize(spec.K);

    const double ng = static_cast<double>(n) * gamma;
    for (int k = 0; k < spec.K; ++k) {
        const double d_rx = rx_divergence(spec, k, b[k]);
        const double d_w = warden_divergence_max(spec, k, b[k]);

        const double target_log_m = (1.0 - epsilon) * a[k] * ng * d_rx;
        if (target_log_m > kLogCountCap)
            throw ScaleGuardExceeded(
                "make_schedule: message count beyond 2^62 for user " + std::to_string(k + 1),
                target_log_m);
        const std::uint64_t m_count =
            std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::exp(target_log_m)));
        if (a[k] > 0.0 && m_count < 2)
            throw InfeasibleSchedule("make_schedule: user " + std::to_string(k + 1) +
                                     " gets fewer than 2 messages; no covert throughput at "
                                     "this (n, delta, epsilon)");

        const double target_log_mj = (1.0 + eps_res) * a[k] * ng * d_w;
        if (target_log_mj > kLogCountCap)
            throw ScaleGuardExceeded(
                "make_schedule: key sizing beyond 2^62 for user " + std::to_string(k + 1),
                target_log_mj);
        const std::uint64_t mj_count =
            std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(std::exp(target_log_mj))));
        const std::uint64_t j_count = mj_count <= m_count ? 1 : (mj_count + m_count - 1) / m_count;

        s.M[k] = m_count;
        s.J[k] = j_count;
        s.log_M[k] = std::log(static_cast<double>(m_count));
        s.log_MJ[k] = std::log(static_cast<double>(m_count)) +
                      std::log(static_cast<double>(j_count));

        // Midpoint threshold between the code rate and the effective-channel
        // capacity proxy; balances the miss and collision exponents.
        const CondTensor eff = effective_channel(spec, k, s.weight);
        double d_eff = 0.0;
        for (int sym = 1; sym < spec.input_sizes[k]; ++sym)
            d_eff += b[k][sym - 1] * detail::kl_raw(eff.row(std::size_t(sym)), eff.row(std::size_t(0)));
        s.tau[k] = 0.5 * (s.log_M[k] + (1.0 - 0.5 * epsilon) * ng * a[k] * d_eff);
    }
    return s;
}

json Schedule::to_json() const {
    json j;
    j["n"] = n;
    j["gamma"] = weight.gamma;
    j["alpha"] = weight.alpha;
    bool binary = true;
    for (const auto& row : weight.beta) binary = binary && row.size() == 1;
    if (!binary) j["beta"] = weight.beta;
    j["M"] = M;
    j["J"] = J;
    j["tau"] = tau;
    j["epsilon"] = epsilon;
    if (epsilon_resolvability != epsilon) j["epsilon_resolvability"] = epsilon_resolvability;
    j["delta"] = delta;
    if (seed) j["seed"] = *seed;
    return j;
}

Schedule Schedule::from_json(const json& j) {
    Schedule s;
    try {
        s.n = j.at("n").get<std::int64_t>();
        const double gamma = j.at("gamma").get<double>();
        auto alpha = j.at("alpha").get<std::vector<double>>();
        if (j.contains("beta"))
            s.weight = InputWeight::general(
                std::move(alpha), j.at("beta").get<std::vector<std::vector<double>>>(), gamma);
        else
            s.weight = InputWeight::binary(std::move(alpha), gamma);
        s.M = j.at("M").get<std::vector<std::uint64_t>>();
        s.J = j.at("J").get<std::vector<std::uint64_t>>();
        s.tau = j.at("tau").get<std::vector<double>>();
        s.epsilon = j.at("epsilon").get<double>();
        s.epsilon_resolvability =
            j.value("epsilon_resolvability", s.epsilon);
        s.delta = j.at("delta").get<double>();
        if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw SpecFormatError(std::string("schedule json: ") + e.what());
    }
    if (s.M.size() != s.weight.alpha.size() || s.J.size() != s.M.size() ||
        s.tau.size() != s.M.size())
        throw SpecFormatError("schedule json: per-user array lengths disagree");
    for (std::size_t k = 0; k < s.M.size(); ++k) {
        if (s.M[k] == 0 || s.J[k] == 0)
            throw SpecFormatError("schedule json: message/key counts must be positive");
        s.log_M.push_back(std::log(static_cast<double>(s.M[k])));
        s.log_MJ.push_back(s.log_M[k] + std::log(static_cast<double>(s.J[k])));
    }
    return s;
}

Schedule Schedule::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecFormatError("cannot open schedule file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SpecFormatError("cannot parse " + path + ": " + e.what());
    }
    return from_json(j);
}

void Schedule::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw SpecFormatError("cannot write schedule file: " + path);
    out << to_json().dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Codebook generation

namespace {

// Sparse i.i.d. draw: geometric gaps between non-off positions, then an
// inverse-CDF symbol draw. O(#nonzero) regardless of n, and the stream
// consumed depends only on (seed, user, codeword index).
void append_codeword(std::mt19937_64& rng, double p_on, std::span<const double> beta_cum,
                     int m, std::int64_t n, std::vector<std::uint32_t>& pos,
                     std::vector<std::uint8_t>& sym) {
    if (p_on <= 0.0) return;
    const double log1mp = std::log1p(-p_on);  // -inf when p_on == 1
    std::int64_t i = -1;
    for (;;) {
        const double u = uniform01(rng);
        i += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-u) / log1mp));
        if (i >= n) break;
        int s = 1;
        if (m > 1) {
            const double v = uniform01(rng);
            while (s < m && v >= beta_cum[s - 1]) ++s;
        }
        pos.push_back(static_cast<std::uint32_t>(i));
        sym.push_back(static_cast<std::uint8_t>(s));
    }
}

}  // namespace

CodebookSet generate_codebooks(const DmIcSpec& spec, const Schedule& schedule,
                               std::uint64_t seed) {
    schedule.weight.validate_for(spec);
    if (static_cast<int>(schedule.M.size()) != spec.K)
        throw InvalidArgument("generate_codebooks: schedule does not match spec");
    for (int s : spec.input_sizes)
        if (s > 256)
            throw ScaleGuardExceeded("generate_codebooks: input alphabets beyond 256 symbols",
                                     double(s));

    double expected_entries = 0.0;
    for (int k = 0; k < spec.K; ++k)
        expected_entries += static_cast<double>(schedule.M[k]) *
                            static_cast<double>(schedule.J[k]) *
                            static_cast<double>(schedule.n) * schedule.weight.on_prob(k);
    if (expected_entries > static_cast<double>(kMaxArenaEntries))
        throw ScaleGuardExceeded(
            "generate_codebooks: expected sparse storage exceeds the materialization guard",
            expected_entries);

    CodebookSet set;
    set.schedule = schedule;
    set.schedule.seed = seed;
    set.seed = seed;
    set.users.resize(spec.K);
    for (int k = 0; k < spec.K; ++k) {
        SparseCodebook& cb = set.users[k];
        const std::uint64_t count = schedule.M[k] * schedule.J[k];
        if (count >= kCountCap)
            throw ScaleGuardExceeded("generate_codebooks: codeword count beyond 2^62",
                                     static_cast<double>(count));
        cb.count = count;
        cb.offsets.reserve(count + 1);
        cb.offsets.push_back(0);
        const double p_on = schedule.weight.on_prob(k);
        const int m = spec.input_sizes[k] - 1;
        std::vector<double> beta_cum(m);
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
            acc += schedule.weight.beta[k][i];
            beta_cum[i] = acc;
        }
        for (std::uint64_t cw = 0; cw < count; ++cw) {
            std::mt19937_64 rng(mix_seed(seed, kCodewordTag, static_cast<std::uint64_t>(k), cw));
            append_codeword(rng, p_on, beta_cum, m, schedule.n, cb.positions, cb.symbols);
            cb.offsets.push_back(cb.positions.size());
        }
    }
    return set;
}

// ---------------------------------------------------------------------------
// TIN decoding

namespace {

struct TinDecoder {
    int ny = 0;
    std::vector<double> llr;  // (sym-1) * ny + y  ->  ln W(y|sym)/W(y|0)
    double tau = 0.0;

    double statistic(std::span<const std::uint32_t> pos, std::span<const std::uint8_t> sym,
                     const std::uint8_t* y) const {
        double t = 0.0;
        for (std::size_t i = 0; i < pos.size(); ++i)
            t += llr[static_cast<std::size_t>(sym[i] - 1) * ny + y[pos[i]]];
        return t;
    }
};

TinDecoder make_tin_decoder(const DmIcSpec& spec, int k, const Schedule& schedule) {
    TinDecoder dec;
    const CondTensor eff = effective_channel(spec, k, schedule.weight);
    dec.ny = eff.out_size();
    const int m = spec.input_sizes[k] - 1;
    dec.llr.resize(static_cast<std::size_t>(m) * dec.ny);
    auto off = eff.row(std::size_t{0});
    for (int sym = 1; sym <= m; ++sym) {
        auto row = eff.row(static_cast<std::size_t>(sym));
        for (int y = 0; y < dec.ny; ++y)
            dec.llr[static_cast<std::size_t>(sym - 1) * dec.ny + y] =
                std::log(row[y] / off[y]);
    }
    dec.tau = schedule.tau[k];
    return dec;
}

void check_key_and_output(const DmIcSpec& spec, int k, std::span<const std::uint8_t> y,
                          const CodebookSet& codebooks, std::uint64_t key) {
    if (k < 0 || k >= spec.K) throw IndexOutOfRange("tin_decode: bad user index");
    if (static_cast<std::int64_t>(y.size()) != codebooks.schedule.n)
        throw InvalidArgument("tin_decode: output sequence length != n");
    if (key >= codebooks.schedule.J[k]) throw IndexOutOfRange("tin_decode: key out of range");
    const int ny = spec.rx[k].out_size();
    for (std::uint8_t v : y)
        if (v >= ny) throw IndexOutOfRange("tin_decode: output symbol out of alphabet");
}

}  // namespace

std::optional<std::uint64_t> tin_decode(const DmIcSpec& spec, int k,
                                        std::span<const std::uint8_t> y,
                                        const CodebookSet& codebooks, std::uint64_t key) {
    check_key_and_output(spec, k, y, codebooks, key);
    const TinDecoder dec = make_tin_decoder(spec, k, codebooks.schedule);
    const SparseCodebook& cb = codebooks.users[k];
    const std::uint64_t m_count = codebooks.schedule.M[k];
    const std::uint64_t base = key * m_count;
    std::optional<std::uint64_t> hit;
    for (std::uint64_t w = 0; w < m_count; ++w) {
        const std::uint64_t cw = base + w;
        const double t = dec.statistic(cb.cw_positions(cw), cb.cw_symbols(cw), y.data());
        if (t > dec.tau) {
            if (hit) return std::nullopt;  // collision
            hit = w;
        }
    }
    return hit;
}

std::vector<double> tin_statistics(const DmIcSpec& spec, int k,
                                   std::span<const std::uint8_t> y,
                                   const CodebookSet& codebooks, std::uint64_t key) {
    check_key_and_output(spec, k, y, codebooks, key);
    const TinDecoder dec = make_tin_decoder(spec, k, codebooks.schedule);
    const SparseCodebook& cb = codebooks.users[k];
    const std::uint64_t m_count = codebooks.schedule.M[k];
    const std::uint64_t base = key * m_count;
    std::vector<double> out(m_count);
    for (std::uint64_t w = 0; w < m_count; ++w) {
        const std::uint64_t cw = base + w;
        out[w] = dec.statistic(cb.cw_positions(cw), cb.cw_symbols(cw), y.data());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Link-level Monte Carlo

namespace {

struct MergedEvent {
    std::uint32_t pos;
    std::size_t joint;
};

struct TrialScratch {
    std::vector<std::uint8_t> y;
    std::vector<MergedEvent> events;
    std::vector<std::pair<std::uint32_t, int>> raw;  // (pos, sym * stride contribution)
};

// bit k: user k decoding error; the union flag is derived by the caller.
std::uint32_t run_trial(const DmIcSpec& spec, const CodebookSet& cbs,
                        const std::vector<TinDecoder>& decoders,
                        std::span<const std::size_t> strides, std::uint64_t trial_seed,
                        TrialScratch& ws) {
    std::mt19937_64 rng(trial_seed);
    const std::int64_t n = cbs.schedule.n;
    const int K = spec.K;

    std::vector<std::uint64_t> w(K), s(K);
    for (int k = 0; k < K; ++k) {
        w[k] = bounded_uint(rng, cbs.schedule.M[k]);
        s[k] = bounded_uint(rng, cbs.schedule.J[k]);
    }

    // Merge the K sparse codewords into per-position joint row offsets.
    ws.raw.clear();
    for (int k = 0; k < K; ++k) {
        const std::uint64_t cw = cbs.codeword_index(k, w[k], s[k]);
        auto pos = cbs.users[k].cw_positions(cw);
        auto sym = cbs.users[k].cw_symbols(cw);
        for (std::size_t i = 0; i < pos.size(); ++i)
            ws.raw.emplace_back(pos[i], static_cast<int>(sym[i] * strides[k]));
    }
    std::sort(ws.raw.begin(), ws.raw.end());
    ws.events.clear();
    for (std::size_t i = 0; i < ws.raw.size();) {
        std::size_t joint = 0;
        const std::uint32_t p = ws.raw[i].first;
        while (i < ws.raw.size() && ws.raw[i].first == p) joint += ws.raw[i++].second;
        ws.events.push_back({p, joint});
    }

    std::uint32_t errors = 0;
    for (int k = 0; k < K; ++k) {
        // Synthesize y_k through the true marginal, event positions included.
        const CondTensor& ch = spec.rx[k];
        auto base = ch.row(std::size_t{0});
        std::size_t ev = 0;
        for (std::int64_t i = 0; i < n; ++i) {
            std::span<const double> row = base;
            if (ev < ws.events.size() && ws.events[ev].pos == i) row = ch.row(ws.events[ev++].joint);
            const double u = uniform01(rng);
            double acc = 0.0;
            std::uint8_t sym = static_cast<std::uint8_t>(row.size() - 1);
            for (std::size_t z = 0; z + 1 < row.size(); ++z) {
                acc += row[z];
                if (u < acc) {
                    sym = static_cast<std::uint8_t>(z);
                    break;
                }
            }
            ws.y[i] = sym;
        }

        // Decode with the key slice s_k.
        const TinDecoder& dec = decoders[k];
        const SparseCodebook& cb = cbs.users[k];
        const std::uint64_t m_count = cbs.schedule.M[k];
        const std::uint64_t slice = s[k] * m_count;
        std::uint64_t hit = m_count;
        bool collision = false;
        for (std::uint64_t msg = 0; msg < m_count; ++msg) {
            const std::uint64_t cw = slice + msg;
            const double t =
                dec.statistic(cb.cw_positions(cw), cb.cw_symbols(cw), ws.y.data());
            if (t > dec.tau) {
                if (hit != m_count) {
                    collision = true;
                    break;
                }
                hit = msg;
            }
        }
        const bool ok = !collision && hit == w[k];
        if (!ok) errors |= (std::uint32_t{1} << k);
    }
    return errors;
}

ErrorRateReport run_simulation(const DmIcSpec& spec, const CodebookSet& cbs,
                               std::uint64_t trials, std::uint64_t seed, bool parallel) {
    if (trials == 0) throw InvalidArgument("simulate_error_rate: trials must be >= 1");
    if (spec.K > 30) throw ScaleGuardExceeded("simulate_error_rate: K beyond 30", spec.K);
    cbs.schedule.weight.validate_for(spec);

    std::vector<TinDecoder> decoders;
    for (int k = 0; k < spec.K; ++k)
        decoders.push_back(make_tin_decoder(spec, k, cbs.schedule));
    std::vector<std::size_t> strides(spec.K, 1);
    for (int k = spec.K - 2; k >= 0; --k)
        strides[k] = strides[k + 1] * static_cast<std::size_t>(spec.input_sizes[k + 1]);

    std::vector<std::uint32_t> outcomes(trials);
    const std::int64_t nt = static_cast<std::int64_t>(trials);
#ifdef _OPENMP
#pragma omp parallel if (parallel)
#endif
    {
        TrialScratch ws;
        ws.y.resize(cbs.schedule.n);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
        for (std::int64_t t = 0; t < nt; ++t)
            outcomes[t] = run_trial(spec, cbs, decoders, strides,
                                    mix_seed(seed, kTrialTag, static_cast<std::uint64_t>(t)), ws);
    }

    ErrorRateReport rep;
    rep.trials = trials;
    rep.per_user_errors.assign(spec.K, 0);
    for (std::uint32_t o : outcomes) {
        if (o) ++rep.union_errors;
        for (int k = 0; k < spec.K; ++k)
            if (o & (std::uint32_t{1} << k)) ++rep.per_user_errors[k];
    }
    for (int k = 0; k < spec.K; ++k)
        rep.per_user_ci.push_back(wilson_interval(rep.per_user_errors[k], trials));
    rep.union_ci = wilson_interval(rep.union_errors, trials);
    return rep;
}

}  // namespace

ErrorRateReport simulate_error_rate(const DmIcSpec& spec, const CodebookSet& codebooks,
                                    std::uint64_t trials, std::uint64_t seed) {
    return run_simulation(spec, codebooks, trials, seed, true);
}

ErrorRateReport simulate_error_rate_serial(const DmIcSpec& spec, const CodebookSet& codebooks,
                                           std::uint64_t trials, std::uint64_t seed) {
    return run_simulation(spec, codebooks, trials, seed, false);
}

json ErrorRateReport::to_json() const {
    json j;
    j["trials"] = trials;
    j["union_errors"] = union_errors;
    j["union_rate"] = union_rate();
    j["union_ci"] = {union_ci.lo, union_ci.hi};
    j["per_user_errors"] = per_user_errors;
    json rates = json::array(), cis = json::array();
    for (std::size_t k = 0; k < per_user_errors.size(); ++k) {
        rates.push_back(user_rate(static_cast<int>(k)));
        cis.push_back({per_user_ci[k].lo, per_user_ci[k].hi});
    }
    j["per_user_rate"] = rates;
    j["per_user_ci"] = cis;
    return j;
}

}  // namespace covertic
