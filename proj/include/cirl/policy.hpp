#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cirl/control.hpp"
#include "cirl/env.hpp"

namespace cirl {

/// Fully connected network shape; rectified-linear hidden layers, identity
/// output (clamped downstream by the policy heads).
struct MlpLayout {
    int input = 0;
    std::vector<int> hidden;
    int output = 0;

    static MlpLayout cirl() { return {12, {16, 16, 16}, 6}; }
    static MlpLayout pure_rl() { return {12, {128, 128, 128}, 2}; }

    int param_count() const {
        int n = 0;
        int in = input;
        for (int h : hidden) {
            n += in * h + h;
            in = h;
        }
        n += in * output + output;
        return n;
    }

    bool operator==(const MlpLayout&) const = default;
};

enum class PolicyKind { cirl, pure_rl };

inline std::string to_string(PolicyKind k) { return k == PolicyKind::cirl ? "cirl" : "pure_rl"; }

inline PolicyKind policy_kind_from_string(const std::string& s) {
    if (s == "cirl") return PolicyKind::cirl;
    if (s == "pure_rl" || s == "rl") return PolicyKind::pure_rl;
    throw DataError("unknown policy kind: " + s);
}

/// Flat parameter vector plus its layout. Packing order is layer-major:
/// weights row-major (one row per output neuron), then biases.
struct PolicyParams {
    PolicyKind kind = PolicyKind::cirl;
    MlpLayout layout = MlpLayout::cirl();
    std::vector<double> params;

    static PolicyParams zeros(PolicyKind k) {
        PolicyParams p;
        p.kind = k;
        p.layout = k == PolicyKind::cirl ? MlpLayout::cirl() : MlpLayout::pure_rl();
        p.params.assign(static_cast<std::size_t>(p.layout.param_count()), 0.0);
        return p;
    }

    static PolicyParams from_vector(PolicyKind k, std::vector<double> v) {
        PolicyParams p = zeros(k);
        if (v.size() != p.params.size())
            throw std::invalid_argument("PolicyParams: expected " +
                                        std::to_string(p.params.size()) + " parameters, got " +
                                        std::to_string(v.size()));
        p.params = std::move(v);
        return p;
    }
};

/// Feedforward pass; throws on input or parameter length mismatch.
inline std::vector<double> mlp_forward(const MlpLayout& layout, std::span<const double> params,
                                       std::span<const double> x) {
    if (static_cast<int>(x.size()) != layout.input)
        throw std::invalid_argument("mlp_forward: input size mismatch");
    if (static_cast<int>(params.size()) != layout.param_count())
        throw std::invalid_argument("mlp_forward: parameter size mismatch");

    std::vector<double> a(x.begin(), x.end());
    std::vector<double> z;
    std::size_t off = 0;
    std::vector<int> widths = layout.hidden;
    widths.push_back(layout.output);
    for (std::size_t l = 0; l < widths.size(); ++l) {
        const int n_in = static_cast<int>(a.size());
        const int n_out = widths[l];
        z.assign(static_cast<std::size_t>(n_out), 0.0);
        for (int j = 0; j < n_out; ++j) {
            double acc = 0.0;
            const double* w = params.data() + off + static_cast<std::size_t>(j) * n_in;
            for (int i = 0; i < n_in; ++i) acc += w[i] * a[static_cast<std::size_t>(i)];
            z[static_cast<std::size_t>(j)] = acc;
        }
        off += static_cast<std::size_t>(n_out) * n_in;
        for (int j = 0; j < n_out; ++j) z[static_cast<std::size_t>(j)] += params[off + j];
        off += static_cast<std::size_t>(n_out);
        const bool last = l + 1 == widths.size();
        if (!last)
            for (auto& v : z) v = v > 0.0 ? v : 0.0;
        a = z;
    }
    return a;
}

/// Normalized 12-vector: [C_B, T, V] at t, t-1, t-2 then C_B* at t, t-1, t-2.
/// V* is constant across the studied scenarios and enters only the PID error.
inline std::array<double, 12> build_observation_vector(const Observation& obs,
                                                       const Ranges& r = {}) {
    std::array<double, 12> v;
    for (int i = 0; i < 3; ++i) {
        v[3 * i + 0] = r.norm_cb(obs.measured[i].c_b);
        v[3 * i + 1] = r.norm_t(obs.measured[i].temp);
        v[3 * i + 2] = r.norm_v(obs.measured[i].vol);
    }
    for (int i = 0; i < 3; ++i) v[9 + i] = r.norm_cb(obs.setpoints[i].c_b);
    return v;
}

namespace detail {

/// Affine map centered on the interval midpoint, then clamp: raw 0 lands at
/// the midpoint, raw +-1 at the bounds.
inline double squash(double raw, double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    return std::clamp(mid + raw * half, lo, hi);
}

} // namespace detail

/// Maps the six raw network outputs to bounded gains, order
/// [kp_cb, ti_cb, td_cb, kp_v, ti_v, td_v].
inline PidGainSet gains_from_raw(std::span<const double> raw, const GainBounds& b = {}) {
    if (raw.size() != 6) throw std::invalid_argument("gains_from_raw: expected 6 outputs");
    PidGainSet g;
    g.cb = {detail::squash(raw[0], b.cb.lo.k_p, b.cb.hi.k_p),
            detail::squash(raw[1], b.cb.lo.tau_i, b.cb.hi.tau_i),
            detail::squash(raw[2], b.cb.lo.tau_d, b.cb.hi.tau_d)};
    g.vol = {detail::squash(raw[3], b.vol.lo.k_p, b.vol.hi.k_p),
             detail::squash(raw[4], b.vol.lo.tau_i, b.vol.hi.tau_i),
             detail::squash(raw[5], b.vol.lo.tau_d, b.vol.hi.tau_d)};
    return g;
}

struct CirlStep {
    PidGainSet gains;
    Action action;
};

/// CIRL head: network emits PID gains, the embedded velocity PID emits the
/// control increment.
inline CirlStep cirl_act(const PolicyParams& p, const Observation& obs, const Action& prev_u,
                         double dt, const Ranges& ranges = {}) {
    if (p.kind != PolicyKind::cirl) throw ProtocolError("cirl_act: policy kind is not cirl");
    const auto x = build_observation_vector(obs, ranges);
    const auto raw = mlp_forward(p.layout, p.params, x);
    const PidGainSet g = gains_from_raw(raw);
    return {g, pid_step(g, obs, prev_u, dt, ranges)};
}

/// Pure-RL head: network emits the control action directly.
inline Action purerl_act(const PolicyParams& p, const Observation& obs,
                         const Ranges& ranges = {}) {
    if (p.kind != PolicyKind::pure_rl)
        throw ProtocolError("purerl_act: policy kind is not pure_rl");
    const auto x = build_observation_vector(obs, ranges);
    const auto raw = mlp_forward(p.layout, p.params, x);
    return {detail::squash(raw[0], ActionBounds::t_c_lo, ActionBounds::t_c_hi),
            detail::squash(raw[1], ActionBounds::f_in_lo, ActionBounds::f_in_hi)};
}

// --- Persistence -------------------------------------------------------------

/// FNV-1a over the parameter bytes; identifies a policy's content.
inline std::string content_hash(const std::vector<double>& params) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (double d : params) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, sizeof bits);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xFF;
            h *= 0x100000001B3ull;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct PolicyMetadata {
    std::uint64_t seed = 0;
    std::string scenario;
};

inline nlohmann::json policy_to_json(const PolicyParams& p, const PolicyMetadata& meta = {}) {
    nlohmann::json j;
    j["kind"] = to_string(p.kind);
    j["layout"] = {{"input", p.layout.input}, {"hidden", p.layout.hidden},
                   {"output", p.layout.output}};
    j["params"] = p.params;
    j["metadata"] = {{"seed", meta.seed}, {"scenario", meta.scenario},
                     {"hash", content_hash(p.params)}};
    return j;
}

inline PolicyParams policy_from_json(const nlohmann::json& j) {
    try {
        PolicyParams p;
        p.kind = policy_kind_from_string(j.at("kind").get<std::string>());
        p.layout.input = j.at("layout").at("input").get<int>();
        p.layout.hidden = j.at("layout").at("hidden").get<std::vector<int>>();
        p.layout.output = j.at("layout").at("output").get<int>();
        p.params = j.at("params").get<std::vector<double>>();
        if (static_cast<int>(p.params.size()) != p.layout.param_count())
            throw DataError("policy file: parameter count does not match layout");
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("policy schema: ") + e.what());
    }
}

// --- Static PID gain persistence ---------------------------------------------

inline nlohmann::json gains_to_json(const PidGainSet& g) {
    return {{"cb_loop", {{"k_p", g.cb.k_p}, {"tau_i", g.cb.tau_i}, {"tau_d", g.cb.tau_d}}},
            {"v_loop", {{"k_p", g.vol.k_p}, {"tau_i", g.vol.tau_i}, {"tau_d", g.vol.tau_d}}}};
}

inline PidGainSet gains_from_json(const nlohmann::json& j) {
    try {
        PidGainSet g;
        g.cb = {j.at("cb_loop").at("k_p").get<double>(), j.at("cb_loop").at("tau_i").get<double>(),
                j.at("cb_loop").at("tau_d").get<double>()};
        g.vol = {j.at("v_loop").at("k_p").get<double>(), j.at("v_loop").at("tau_i").get<double>(),
                 j.at("v_loop").at("tau_d").get<double>()};
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("gain schema: ") + e.what());
    }
}

} // namespace cirl
