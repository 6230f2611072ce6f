#include "covertic/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "covertic/detail/simplex_lp.hpp"
#include "covertic/errors.hpp"
#include "covertic/rng.hpp"

namespace covertic {

using nlohmann::json;

// ---------------------------------------------------------------------------
// CondTensor

CondTensor::CondTensor(std::vector<int> in_sizes, int out_size, std::vector<double> probs)
    : in_sizes_(std::move(in_sizes)), out_size_(out_size), p_(std::move(probs)) {
    if (in_sizes_.empty()) throw SpecFormatError("CondTensor: no input dimensions");
    if (out_size_ < 2) throw SpecFormatError("CondTensor: output alphabet must have >= 2 symbols");
    rows_ = 1;
    for (int s : in_sizes_) {
        if (s < 1) throw SpecFormatError("CondTensor: input alphabet must have >= 1 symbol");
        rows_ *= static_cast<std::size_t>(s);
    }
    if (p_.size() != rows_ * static_cast<std::size_t>(out_size_))
        throw SpecFormatError("CondTensor: entry count does not match dimensions");
    strides_.assign(in_sizes_.size(), 1);
    for (int k = static_cast<int>(in_sizes_.size()) - 2; k >= 0; --k)
        strides_[k] = strides_[k + 1] * static_cast<std::size_t>(in_sizes_[k + 1]);

    // Every row must be a probability distribution.
    for (std::size_t r = 0; r < rows_; ++r) {
        double sum = 0.0;
        for (int z = 0; z < out_size_; ++z) {
            double& v = p_[r * out_size_ + z];
            if (v < 0.0) {
                if (v < -1e-12)
                    throw SpecFormatError("CondTensor: negative probability in row " +
                                          std::to_string(r));
                v = 0.0;
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw SpecFormatError("CondTensor: row " + std::to_string(r) + " sums to " +
                                  std::to_string(sum));
        for (int z = 0; z < out_size_; ++z) p_[r * out_size_ + z] /= sum;
    }
}

std::size_t CondTensor::joint_index(std::span<const int> x) const {
    if (x.size() != in_sizes_.size())
        throw IndexOutOfRange("CondTensor: tuple has wrong arity");
    std::size_t joint = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k] < 0 || x[k] >= in_sizes_[k])
            throw IndexOutOfRange("CondTensor: symbol " + std::to_string(x[k]) +
                                  " out of range for user " + std::to_string(k + 1));
        joint += strides_[k] * static_cast<std::size_t>(x[k]);
    }
    return joint;
}

std::span<const double> CondTensor::row(std::size_t joint) const {
    if (joint >= rows_) throw IndexOutOfRange("CondTensor: row index out of range");
    return {p_.data() + joint * out_size_, static_cast<std::size_t>(out_size_)};
}

// ---------------------------------------------------------------------------
// DmIcSpec

bool DmIcSpec::binary() const {
    return std::all_of(input_sizes.begin(), input_sizes.end(), [](int s) { return s == 2; });
}

void DmIcSpec::validate() const {
    if (K < 2) throw SpecFormatError("spec: need K >= 2 users");
    if (static_cast<int>(input_sizes.size()) != K)
        throw SpecFormatError("spec: input_sizes must have K entries");
    for (int s : input_sizes)
        if (s < 2) throw SpecFormatError("spec: every input alphabet needs >= 2 symbols");
    if (static_cast<int>(rx.size()) != K)
        throw SpecFormatError("spec: need one receiver channel per user");
    if (warden.empty()) throw SpecFormatError("spec: need at least one warden channel");
    for (const CondTensor& t : rx)
        if (t.in_sizes() != input_sizes)
            throw SpecFormatError("spec: receiver tensor input sizes mismatch");
    for (const CondTensor& t : warden)
        if (t.in_sizes() != input_sizes)
            throw SpecFormatError("spec: warden tensor input sizes mismatch");
}

std::span<const double> DmIcSpec::rx_off(int k) const { return rx[k].row(std::size_t{0}); }

std::span<const double> DmIcSpec::rx_single(int k, int sym) const {
    std::vector<int> x(K, 0);
    x[k] = sym;
    return rx[k].row(std::span<const int>(x));
}

std::span<const double> DmIcSpec::warden_off(int j) const { return warden[j].row(std::size_t{0}); }

std::span<const double> DmIcSpec::warden_single(int j, int k, int sym) const {
    std::vector<int> x(K, 0);
    x[k] = sym;
    return warden[j].row(std::span<const int>(x));
}

namespace {

void parse_tensor_level(const json& node, std::span<const int> dims, std::size_t depth,
                        int& out_size, std::vector<double>& flat) {
    if (depth == dims.size()) {
        if (!node.is_array() || node.empty())
            throw SpecFormatError("spec json: expected an output distribution array");
        if (out_size < 0) out_size = static_cast<int>(node.size());
        if (static_cast<int>(node.size()) != out_size)
            throw SpecFormatError("spec json: ragged output arrays in one tensor");
        for (const auto& v : node) {
            if (!v.is_number()) throw SpecFormatError("spec json: probabilities must be numbers");
            flat.push_back(v.get<double>());
        }
        return;
    }
    if (!node.is_array() || static_cast<int>(node.size()) != dims[depth])
        throw SpecFormatError("spec json: nesting does not match input_sizes at depth " +
                              std::to_string(depth));
    for (const auto& child : node) parse_tensor_level(child, dims, depth + 1, out_size, flat);
}

CondTensor parse_tensor(const json& node, const std::vector<int>& dims) {
    int out_size = -1;
    std::vector<double> flat;
    parse_tensor_level(node, dims, 0, out_size, flat);
    return CondTensor(dims, out_size, std::move(flat));
}

json emit_tensor_level(const CondTensor& t, std::size_t depth, std::size_t& next_row) {
    json arr = json::array();
    if (depth == t.in_sizes().size()) {
        for (double v : t.row(next_row)) arr.push_back(v);
        ++next_row;
        return arr;
    }
    for (int i = 0; i < t.in_sizes()[depth]; ++i)
        arr.push_back(emit_tensor_level(t, depth + 1, next_row));
    return arr;
}

json emit_tensor(const CondTensor& t) {
    std::size_t row = 0;
    json out = emit_tensor_level(t, 0, row);
    return out;
}

}  // namespace

DmIcSpec DmIcSpec::from_json(const json& j) {
    DmIcSpec spec;
    try {
        spec.K = j.at("K").get<int>();
        spec.input_sizes = j.at("input_sizes").get<std::vector<int>>();
        if (static_cast<int>(spec.input_sizes.size()) != spec.K)
            throw SpecFormatError("spec json: input_sizes length != K");
        std::size_t rows = 1;
        for (int s : spec.input_sizes) rows *= static_cast<std::size_t>(std::max(s, 1));
        if (rows > (std::size_t{1} << 24))
            throw SpecFormatError("spec json: joint input space too large");
        for (const auto& node : j.at("rx_channels"))
            spec.rx.push_back(parse_tensor(node, spec.input_sizes));
        for (const auto& node : j.at("warden_channels"))
            spec.warden.push_back(parse_tensor(node, spec.input_sizes));
    } catch (const json::exception& e) {
        throw SpecFormatError(std::string("spec json: ") + e.what());
    }
    spec.validate();
    return spec;
}

json DmIcSpec::to_json() const {
    json j;
    j["K"] = K;
    j["input_sizes"] = input_sizes;
    j["rx_channels"] = json::array();
    for (const CondTensor& t : rx) j["rx_channels"].push_back(emit_tensor(t));
    j["warden_channels"] = json::array();
    for (const CondTensor& t : warden) j["warden_channels"].push_back(emit_tensor(t));
    return j;
}

DmIcSpec DmIcSpec::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecFormatError("cannot open spec file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SpecFormatError("cannot parse " + path + ": " + e.what());
    }
    return from_json(j);
}

void DmIcSpec::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw SpecFormatError("cannot write spec file: " + path);
    out << to_json().dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// InputWeight

InputWeight InputWeight::binary(std::vector<double> alpha, double gamma) {
    InputWeight w;
    w.beta.assign(alpha.size(), std::vector<double>{1.0});
    w.alpha = std::move(alpha);
    w.gamma = gamma;
    detail::normalize_simplex(w.alpha, "InputWeight alpha");
    if (gamma < 0.0 || gamma > 1.0)
        throw InvalidArgument("InputWeight: gamma must lie in [0, 1]");
    return w;
}

InputWeight InputWeight::general(std::vector<double> alpha,
                                 std::vector<std::vector<double>> beta, double gamma) {
    InputWeight w;
    w.alpha = std::move(alpha);
    w.beta = std::move(beta);
    w.gamma = gamma;
    detail::normalize_simplex(w.alpha, "InputWeight alpha");
    if (w.beta.size() != w.alpha.size())
        throw InvalidArgument("InputWeight: need one beta row per user");
    for (auto& row : w.beta) detail::normalize_simplex(row, "InputWeight beta row");
    if (gamma < 0.0 || gamma > 1.0)
        throw InvalidArgument("InputWeight: gamma must lie in [0, 1]");
    return w;
}

double InputWeight::symbol_prob(int k, int sym) const {
    if (sym == 0) return 1.0 - alpha[k] * gamma;
    return alpha[k] * beta[k][sym - 1] * gamma;
}

void InputWeight::validate_for(const DmIcSpec& spec) const {
    if (users() != spec.K) throw InvalidArgument("InputWeight: alpha length != K");
    for (int k = 0; k < spec.K; ++k) {
        if (static_cast<int>(beta[k].size()) != spec.input_sizes[k] - 1)
            throw InvalidArgument("InputWeight: beta row " + std::to_string(k + 1) +
                                  " must weight symbols 1.." +
                                  std::to_string(spec.input_sizes[k] - 1));
    }
}

// ---------------------------------------------------------------------------
// Single-letter derivations

PointDists point_dists(const DmIcSpec& spec, std::span<const int> x) {
    PointDists out;
    for (int k = 0; k < spec.K; ++k) {
        auto r = spec.rx[k].row(x);
        out.rx.emplace_back(std::vector<double>(r.begin(), r.end()));
    }
    for (int j = 0; j < spec.J(); ++j) {
        auto r = spec.warden[j].row(x);
        out.warden.emplace_back(std::vector<double>(r.begin(), r.end()));
    }
    return out;
}

CondTensor effective_channel(const DmIcSpec& spec, int k, const InputWeight& w) {
    w.validate_for(spec);
    if (k < 0 || k >= spec.K) throw IndexOutOfRange("effective_channel: bad user index");
    const int mx = spec.input_sizes[k];
    const int ny = spec.rx[k].out_size();
    std::vector<double> acc(static_cast<std::size_t>(mx) * ny, 0.0);
    detail::for_each_tuple(spec.input_sizes, [&](std::span<const int> x, std::size_t joint) {
        double wgt = 1.0;
        for (int u = 0; u < spec.K; ++u)
            if (u != k) wgt *= w.symbol_prob(u, x[u]);
        if (wgt == 0.0) return;
        auto row = spec.rx[k].row(joint);
        double* dst = acc.data() + static_cast<std::size_t>(x[k]) * ny;
        for (int y = 0; y < ny; ++y) dst[y] += wgt * row[y];
    });
    return CondTensor({mx}, ny, std::move(acc));
}

Dist induced_warden_dist(const DmIcSpec& spec, int j, const InputWeight& w) {
    w.validate_for(spec);
    if (j < 0 || j >= spec.J()) throw IndexOutOfRange("induced_warden_dist: bad warden index");
    const int nz = spec.warden[j].out_size();
    std::vector<double> acc(nz, 0.0);
    detail::for_each_tuple(spec.input_sizes, [&](std::span<const int> x, std::size_t joint) {
        double p = 1.0;
        for (int u = 0; u < spec.K; ++u) p *= w.symbol_prob(u, x[u]);
        if (p == 0.0) return;
        auto row = spec.warden[j].row(joint);
        for (int z = 0; z < nz; ++z) acc[z] += p * row[z];
    });
    return Dist(std::move(acc));
}

double chi_squared(const DmIcSpec& spec, int j, std::span<const double> alpha,
                   const std::vector<std::vector<double>>* beta) {
    if (j < 0 || j >= spec.J()) throw IndexOutOfRange("chi_squared: bad warden index");
    std::vector<double> a(alpha.begin(), alpha.end());
    if (static_cast<int>(a.size()) != spec.K)
        throw InvalidArgument("chi_squared: alpha length != K");
    detail::normalize_simplex(a, "chi_squared alpha");

    auto q0 = spec.warden_off(j);
    const int nz = spec.warden[j].out_size();
    std::vector<double> mix(nz, 0.0);
    for (int k = 0; k < spec.K; ++k) {
        const int m = spec.input_sizes[k] - 1;
        for (int sym = 1; sym <= m; ++sym) {
            double bw = 1.0;
            if (beta) {
                if (static_cast<int>((*beta)[k].size()) != m)
                    throw InvalidArgument("chi_squared: beta row length mismatch");
                bw = (*beta)[k][sym - 1];
            } else if (m != 1) {
                throw InvalidArgument("chi_squared: non-binary spec needs beta weights");
            }
            if (bw == 0.0 && a[k] == 0.0) continue;
            auto qk = spec.warden_single(j, k, sym);
            for (int z = 0; z < nz; ++z) mix[z] += a[k] * bw * qk[z];
        }
    }
    double chi2 = 0.0;
    for (int z = 0; z < nz; ++z) {
        const double diff = mix[z] - q0[z];
        if (q0[z] == 0.0) {
            if (mix[z] != 0.0)
                throw AbsoluteContinuityViolation(
                    "chi_squared: mixture has mass where Q_0 is zero");
            continue;
        }
        chi2 += diff * diff / q0[z];
    }
    return chi2;
}

double chi_squared_max(const DmIcSpec& spec, std::span<const double> alpha,
                       const std::vector<std::vector<double>>* beta) {
    double best = 0.0;
    for (int j = 0; j < spec.J(); ++j) best = std::max(best, chi_squared(spec, j, alpha, beta));
    return best;
}

double rx_divergence(const DmIcSpec& spec, int k, std::span<const double> beta_row) {
    if (k < 0 || k >= spec.K) throw IndexOutOfRange("rx_divergence: bad user index");
    const int m = spec.input_sizes[k] - 1;
    auto off = spec.rx_off(k);
    if (beta_row.empty() && m != 1)
        throw InvalidArgument("rx_divergence: non-binary user needs beta weights");
    if (beta_row.empty()) return detail::kl_raw(spec.rx_single(k, 1), off);
    if (static_cast<int>(beta_row.size()) != m)
        throw InvalidArgument("rx_divergence: beta row length mismatch");
    double d = 0.0;
    for (int sym = 1; sym <= m; ++sym)
        if (beta_row[sym - 1] != 0.0)
            d += beta_row[sym - 1] * detail::kl_raw(spec.rx_single(k, sym), off);
    return d;
}

double warden_divergence(const DmIcSpec& spec, int j, int k, std::span<const double> beta_row) {
    if (j < 0 || j >= spec.J()) throw IndexOutOfRange("warden_divergence: bad warden index");
    if (k < 0 || k >= spec.K) throw IndexOutOfRange("warden_divergence: bad user index");
    const int m = spec.input_sizes[k] - 1;
    auto off = spec.warden_off(j);
    if (beta_row.empty() && m != 1)
        throw InvalidArgument("warden_divergence: non-binary user needs beta weights");
    if (beta_row.empty()) return detail::kl_raw(spec.warden_single(j, k, 1), off);
    if (static_cast<int>(beta_row.size()) != m)
        throw InvalidArgument("warden_divergence: beta row length mismatch");
    double d = 0.0;
    for (int sym = 1; sym <= m; ++sym)
        if (beta_row[sym - 1] != 0.0)
            d += beta_row[sym - 1] * detail::kl_raw(spec.warden_single(j, k, sym), off);
    return d;
}

double warden_divergence_max(const DmIcSpec& spec, int k, std::span<const double> beta_row) {
    double best = 0.0;
    for (int j = 0; j < spec.J(); ++j)
        best = std::max(best, warden_divergence(spec, j, k, beta_row));
    return best;
}

SandwichReport check_lemma1_sandwich(const DmIcSpec& spec, int j, const InputWeight& w) {
    if (!spec.binary())
        throw InvalidArgument("check_lemma1_sandwich: stated for binary-input specs");
    double chi2;
    try {
        chi2 = chi_squared(spec, j, w.alpha);
    } catch (const AbsoluteContinuityViolation& e) {
        throw AssumptionViolation(std::string("check_lemma1_sandwich: ") + e.what());
    }
    SandwichReport rep;
    Dist induced = induced_warden_dist(spec, j, w);
    auto q0 = spec.warden_off(j);
    try {
        rep.d_exact = detail::kl_raw(induced.probs(), q0);
    } catch (const AbsoluteContinuityViolation& e) {
        throw AssumptionViolation(std::string("check_lemma1_sandwich: ") + e.what());
    }
    const double g = w.gamma;
    const double base = 0.5 * g * g * chi2;
    rep.lower = base * (1.0 - std::sqrt(g));
    rep.upper = base * (1.0 + std::sqrt(g));
    rep.holds = rep.lower <= rep.d_exact && rep.d_exact <= rep.upper;
    return rep;
}

MutualInfoReport mutual_info_warden(const DmIcSpec& spec, int j, std::span<const int> users,
                                    const InputWeight& w) {
    if (users.empty()) throw EmptySubset("mutual_info_warden: subset of users is empty");
    w.validate_for(spec);
    if (j < 0 || j >= spec.J()) throw IndexOutOfRange("mutual_info_warden: bad warden index");
    std::vector<bool> seen(spec.K, false);
    for (int u : users) {
        if (u < 0 || u >= spec.K) throw IndexOutOfRange("mutual_info_warden: bad user index");
        if (seen[u]) throw InvalidArgument("mutual_info_warden: duplicate user index");
        seen[u] = true;
    }

    // Joint distribution of (X_U, Z_j) under the product input law.
    std::size_t ucard = 1;
    for (int u : users) ucard *= static_cast<std::size_t>(spec.input_sizes[u]);
    const int nz = spec.warden[j].out_size();
    std::vector<double> joint(ucard * nz, 0.0);
    detail::for_each_tuple(spec.input_sizes, [&](std::span<const int> x, std::size_t jointrow) {
        double p = 1.0;
        for (int u = 0; u < spec.K; ++u) p *= w.symbol_prob(u, x[u]);
        if (p == 0.0) return;
        std::size_t uidx = 0;
        for (int u : users) uidx = uidx * static_cast<std::size_t>(spec.input_sizes[u]) + x[u];
        auto row = spec.warden[j].row(jointrow);
        for (int z = 0; z < nz; ++z) joint[uidx * nz + z] += p * row[z];
    });

    std::vector<double> pu(ucard, 0.0), pz(nz, 0.0);
    for (std::size_t u = 0; u < ucard; ++u)
        for (int z = 0; z < nz; ++z) {
            pu[u] += joint[u * nz + z];
            pz[z] += joint[u * nz + z];
        }
    MutualInfoReport rep;
    double info = 0.0;
    for (std::size_t u = 0; u < ucard; ++u)
        for (int z = 0; z < nz; ++z) {
            const double pj = joint[u * nz + z];
            if (pj > 0.0) info += pj * std::log(pj / (pu[u] * pz[z]));
        }
    rep.exact = std::max(info, 0.0);
    double fo = 0.0;
    for (int u : users) {
        const int m = spec.input_sizes[u] - 1;
        for (int sym = 1; sym <= m; ++sym) {
            const double p = w.alpha[u] * w.beta[u][sym - 1] * w.gamma;
            if (p == 0.0) continue;
            fo += p * detail::kl_raw(spec.warden_single(j, u, sym), spec.warden_off(j));
        }
    }
    rep.first_order = fo;
    return rep;
}

// ---------------------------------------------------------------------------
// Assumption validation

HullCheck hull_membership(const DmIcSpec& spec, int j) {
    if (j < 0 || j >= spec.J()) throw IndexOutOfRange("hull_membership: bad warden index");
    const int nz = spec.warden[j].out_size();
    auto q0 = spec.warden_off(j);

    std::vector<std::vector<int>> tuples;
    std::vector<std::span<const double>> cols;
    detail::for_each_tuple(spec.input_sizes, [&](std::span<const int> x, std::size_t joint) {
        if (joint == 0) return;  // the all-off tuple is not an active combination
        tuples.emplace_back(x.begin(), x.end());
        cols.push_back(spec.warden[j].row(joint));
    });
    const std::size_t m = cols.size();

    HullCheck check;
    if (nz == 2) {
        // One-dimensional hull: an interval in the mass on symbol 1.
        double lo = cols[0][1], hi = cols[0][1];
        std::size_t ilo = 0, ihi = 0;
        for (std::size_t i = 1; i < m; ++i) {
            if (cols[i][1] < lo) { lo = cols[i][1]; ilo = i; }
            if (cols[i][1] > hi) { hi = cols[i][1]; ihi = i; }
        }
        const double q = q0[1];
        check.distance = std::max({0.0, q - hi, lo - q});
        check.in_hull = check.distance <= 1e-9;
        if (check.in_hull) {
            if (hi - lo < 1e-15) {
                check.witness.push_back({tuples[ilo], 1.0});
            } else {
                const double theta = (hi - q) / (hi - lo);  // weight on the low endpoint
                if (theta > 1e-10) check.witness.push_back({tuples[ilo], theta});
                if (1.0 - theta > 1e-10) check.witness.push_back({tuples[ihi], 1.0 - theta});
            }
        }
        return check;
    }

    // Chebyshev distance LP:
    //   min t  s.t.  sum_i l_i Q_i(z) - t <= q0(z),  sum_i l_i Q_i(z) + t >= q0(z),
    //                sum_i l_i = 1,  l >= 0, t >= 0.
    // Variables: [l_1..l_m, t, s1_1..s1_nz, s2_1..s2_nz].
    const std::size_t nvar = m + 1 + 2 * static_cast<std::size_t>(nz);
    const std::size_t nrow = 2 * static_cast<std::size_t>(nz) + 1;
    std::vector<std::vector<double>> A(nrow, std::vector<double>(nvar, 0.0));
    std::vector<double> b(nrow, 0.0), c(nvar, 0.0);
    for (int z = 0; z < nz; ++z) {
        for (std::size_t i = 0; i < m; ++i) {
            A[z][i] = cols[i][z];
            A[nz + z][i] = cols[i][z];
        }
        A[z][m] = -1.0;
        A[z][m + 1 + z] = 1.0;
        b[z] = q0[z];
        A[nz + z][m] = 1.0;
        A[nz + z][m + 1 + nz + z] = -1.0;
        b[nz + z] = q0[z];
    }
    for (std::size_t i = 0; i < m; ++i) A[nrow - 1][i] = 1.0;
    b[nrow - 1] = 1.0;
    c[m] = 1.0;

    auto lp = detail::solve_lp(std::move(A), std::move(b), std::move(c));
    if (!lp.feasible)
        throw AssumptionViolation("hull_membership: distance LP reported infeasible");
    check.distance = lp.objective;
    check.in_hull = check.distance <= 1e-9;
    if (check.in_hull)
        for (std::size_t i = 0; i < m; ++i)
            if (lp.x[i] > 1e-10) check.witness.push_back({tuples[i], lp.x[i]});
    return check;
}

AssumptionReport validate_assumptions(const DmIcSpec& spec) {
    spec.validate();
    AssumptionReport rep;
    detail::for_each_tuple(spec.input_sizes, [&](std::span<const int> x, std::size_t joint) {
        for (int j = 0; j < spec.J(); ++j) {
            auto row = spec.warden[j].row(joint);
            auto off = spec.warden_off(j);
            for (int z = 0; z < spec.warden[j].out_size(); ++z)
                if (off[z] == 0.0 && row[z] != 0.0) {
                    rep.warden_ac_ok = false;
                    rep.warden_ac_violations.push_back({j, {x.begin(), x.end()}, z});
                    break;
                }
        }
        for (int k = 0; k < spec.K; ++k) {
            auto row = spec.rx[k].row(joint);
            auto off = spec.rx_off(k);
            for (int y = 0; y < spec.rx[k].out_size(); ++y)
                if (off[y] == 0.0 && row[y] != 0.0) {
                    rep.rx_ac_ok = false;
                    rep.rx_ac_violations.push_back({k, {x.begin(), x.end()}, y});
                    break;
                }
        }
    });
    for (int j = 0; j < spec.J(); ++j) {
        rep.hull.push_back(hull_membership(spec, j));
        if (rep.hull.back().in_hull) rep.hull_ok = false;
    }
    return rep;
}

json AssumptionReport::to_json() const {
    json j;
    j["all_ok"] = all_ok();
    j["warden_absolute_continuity"] = warden_ac_ok;
    j["rx_absolute_continuity"] = rx_ac_ok;
    j["hull_ok"] = hull_ok;
    auto violations = [](const std::vector<AcViolation>& vs) {
        json arr = json::array();
        for (const auto& v : vs)
            arr.push_back({{"channel", v.channel}, {"tuple", v.tuple}, {"output", v.output_symbol}});
        return arr;
    };
    j["warden_ac_violations"] = violations(warden_ac_violations);
    j["rx_ac_violations"] = violations(rx_ac_violations);
    j["hull"] = json::array();
    for (const HullCheck& h : hull) {
        json hj;
        hj["in_hull"] = h.in_hull;
        hj["distance"] = h.distance;
        hj["witness"] = json::array();
        for (const auto& t : h.witness)
            hj["witness"].push_back({{"tuple", t.tuple}, {"weight", t.weight}});
        j["hull"].push_back(hj);
    }
    return j;
}

// ---------------------------------------------------------------------------
// Gaussian spec

void GaussianIcSpec::validate() const {
    if (K < 1) throw SpecFormatError("gaussian spec: need K >= 1");
    if (static_cast<int>(gains.size()) != K)
        throw SpecFormatError("gaussian spec: gains must be a KxK array");
    for (const auto& row : gains)
        if (static_cast<int>(row.size()) != K)
            throw SpecFormatError("gaussian spec: gains must be a KxK array");
    if (warden_gains.empty()) throw SpecFormatError("gaussian spec: need warden gains");
    for (const auto& row : warden_gains)
        if (static_cast<int>(row.size()) != K)
            throw SpecFormatError("gaussian spec: each warden needs K gains");
    if (!(sigma2 > 0.0)) throw SpecFormatError("gaussian spec: sigma2 must be positive");
    if (!(power_cap > 0.0)) throw SpecFormatError("gaussian spec: power_cap must be positive");
}

GaussianIcSpec GaussianIcSpec::from_json(const json& j) {
    GaussianIcSpec spec;
    try {
        spec.K = j.at("K").get<int>();
        spec.gains = j.at("gains").get<std::vector<std::vector<double>>>();
        const auto& wg = j.at("warden_gains");
        if (!wg.empty() && wg[0].is_array())
            spec.warden_gains = wg.get<std::vector<std::vector<double>>>();
        else
            spec.warden_gains = {wg.get<std::vector<double>>()};
        spec.sigma2 = j.at("sigma2").get<double>();
        spec.power_cap = j.at("power_cap").get<double>();
    } catch (const json::exception& e) {
        throw SpecFormatError(std::string("gaussian spec json: ") + e.what());
    }
    spec.validate();
    return spec;
}

json GaussianIcSpec::to_json() const {
    json j;
    j["K"] = K;
    j["gains"] = gains;
    if (warden_gains.size() == 1)
        j["warden_gains"] = warden_gains[0];
    else
        j["warden_gains"] = warden_gains;
    j["sigma2"] = sigma2;
    j["power_cap"] = power_cap;
    return j;
}

GaussianIcSpec GaussianIcSpec::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecFormatError("cannot open spec file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SpecFormatError("cannot parse " + path + ": " + e.what());
    }
    return from_json(j);
}

void GaussianIcSpec::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw SpecFormatError("cannot write spec file: " + path);
    out << to_json().dump(2) << "\n";
}

double gaussian_lambda(const GaussianIcSpec& spec, std::span<const double> alpha, int warden) {
    if (warden < 0 || warden >= spec.J())
        throw IndexOutOfRange("gaussian_lambda: bad warden index");
    std::vector<double> a(alpha.begin(), alpha.end());
    if (static_cast<int>(a.size()) != spec.K)
        throw SimplexViolation("gaussian_lambda: alpha length != K");
    detail::normalize_simplex(a, "gaussian_lambda alpha");
    double lam = 0.0;
    for (int k = 0; k < spec.K; ++k) {
        const double g = spec.warden_gains[warden][k];
        lam += a[k] * g * g;
    }
    return lam;
}

double gaussian_lambda(const GaussianIcSpec& spec, std::span<const double> alpha) {
    double best = 0.0;
    for (int j = 0; j < spec.J(); ++j)
        best = std::max(best, gaussian_lambda(spec, alpha, j));
    return best;
}

// ---------------------------------------------------------------------------
// Random spec corpus generator

namespace {

std::vector<double> dirichlet_row(std::mt19937_64& rng, int n) {
    std::vector<double> row(n);
    double sum = 0.0;
    for (double& v : row) {
        v = -std::log(1.0 - uniform01(rng));
        sum += v;
    }
    for (double& v : row) v /= sum;
    return row;
}

CondTensor random_tensor(std::mt19937_64& rng, const std::vector<int>& dims, int out) {
    std::size_t rows = 1;
    for (int d : dims) rows *= static_cast<std::size_t>(d);
    std::vector<double> flat;
    flat.reserve(rows * out);
    for (std::size_t r = 0; r < rows; ++r) {
        auto row = dirichlet_row(rng, out);
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return CondTensor(dims, out, std::move(flat));
}

}  // namespace

DmIcSpec random_binary_dmic(int K, int ny, int nz, int J, std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 0xd12c));
    for (int attempt = 0; attempt < 1000; ++attempt) {
        DmIcSpec spec;
        spec.K = K;
        spec.input_sizes.assign(K, 2);
        for (int k = 0; k < K; ++k) spec.rx.push_back(random_tensor(rng, spec.input_sizes, ny));
        for (int j = 0; j < J; ++j)
            spec.warden.push_back(random_tensor(rng, spec.input_sizes, nz));
        if (validate_assumptions(spec).all_ok()) return spec;
    }
    throw Error("random_binary_dmic: rejection sampling exhausted 1000 attempts");
}

}  // namespace covertic
