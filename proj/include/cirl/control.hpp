#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "cirl/env.hpp"
#include "cirl/sim.hpp"

namespace cirl {

/// (K_p, tau_i, tau_d) for one loop, on normalized signals.
struct LoopGains {
    double k_p = 0.0;
    double tau_i = 0.0;
    double tau_d = 0.0;
};

/// Per-loop gains: C_B <-> T_c loop and V <-> F_in loop.
struct PidGainSet {
    LoopGains cb;
    LoopGains vol;
};

struct LoopGainBounds {
    LoopGains lo;
    LoopGains hi;
};

/// Gain bounds per loop (applied to the normalized gains).
struct GainBounds {
    LoopGainBounds cb{{-5.0, 0.0, 0.0}, {25.0, 20.0, 10.0}};
    LoopGainBounds vol{{0.0, 0.0, 0.0}, {1.0, 2.0, 1.0}};
};

inline LoopGains clamp_gains(const LoopGains& g, const LoopGainBounds& b) {
    return {std::clamp(g.k_p, b.lo.k_p, b.hi.k_p), std::clamp(g.tau_i, b.lo.tau_i, b.hi.tau_i),
            std::clamp(g.tau_d, b.lo.tau_d, b.hi.tau_d)};
}

inline bool within_bounds(const PidGainSet& g, const GainBounds& b = {}) {
    auto in = [](const LoopGains& x, const LoopGainBounds& lb) {
        return x.k_p >= lb.lo.k_p && x.k_p <= lb.hi.k_p && x.tau_i >= lb.lo.tau_i &&
               x.tau_i <= lb.hi.tau_i && x.tau_d >= lb.lo.tau_d && x.tau_d <= lb.hi.tau_d;
    };
    return in(g.cb, b.cb) && in(g.vol, b.vol);
}

/// Last three setpoint errors of one loop, newest first in time labels.
struct ErrorHistory {
    double e_t = 0.0;
    double e_tm1 = 0.0;
    double e_tm2 = 0.0;
};

inline constexpr double kTauIFloor = 1e-6;

/// Velocity-form PID increment on normalized signals:
///   du = Kp*de + (Kp/tau_i)*e*dt + Kp*tau_d*d2e/dt
/// with de = e_t - e_{t-1} and d2e = e_t - 2 e_{t-1} + e_{t-2}.
inline double pid_velocity_delta(const LoopGains& g, const ErrorHistory& h, double dt) {
    const double de = h.e_t - h.e_tm1;
    const double d2e = h.e_t - 2.0 * h.e_tm1 + h.e_tm2;
    return g.k_p * de + (g.k_p / std::max(g.tau_i, kTauIFloor)) * h.e_t * dt +
           g.k_p * g.tau_d * d2e / dt;
}

/// De-normalizes the per-loop increments, adds them to the previous action and
/// saturates. Pairing: C_B loop drives T_c, V loop drives F_in.
inline Action pid_apply(const Action& prev, double delta_cb_loop, double delta_v_loop) {
    Action u = prev;
    u.t_c += delta_cb_loop * (ActionBounds::t_c_hi - ActionBounds::t_c_lo);
    u.f_in += delta_v_loop * (ActionBounds::f_in_hi - ActionBounds::f_in_lo);
    return clamp_action(u);
}

/// Per-loop errors on normalized variables from the newest observation slot.
inline std::array<ErrorHistory, 2> error_histories(const Observation& obs, const Ranges& r) {
    std::array<ErrorHistory, 2> h;
    const auto e_cb = [&](int i) {
        return r.norm_cb(obs.setpoints[i].c_b) - r.norm_cb(obs.measured[i].c_b);
    };
    const auto e_v = [&](int i) {
        return r.norm_v(obs.setpoints[i].vol) - r.norm_v(obs.measured[i].vol);
    };
    h[0] = {e_cb(0), e_cb(1), e_cb(2)};
    h[1] = {e_v(0), e_v(1), e_v(2)};
    return h;
}

/// One velocity-PID control step for both loops.
inline Action pid_step(const PidGainSet& g, const Observation& obs, const Action& prev_u,
                       double dt, const Ranges& ranges = {}) {
    const auto h = error_histories(obs, ranges);
    return pid_apply(prev_u, pid_velocity_delta(g.cb, h[0], dt),
                     pid_velocity_delta(g.vol, h[1], dt));
}

// --- Relative gain array -----------------------------------------------------

using Mat2 = std::array<std::array<double, 2>, 2>;

/// Lambda = K o (K^-1)^T elementwise; rows and columns each sum to 1.
inline Mat2 rga(const Mat2& k) {
    const double det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
    if (std::abs(det) < 1e-300 ||
        std::abs(det) < 1e-12 * std::max({std::abs(k[0][0] * k[1][1]),
                                          std::abs(k[0][1] * k[1][0]), 1e-300}))
        throw SingularMatrixError("rga: singular gain matrix");
    // (K^-1)^T = 1/det * [[k11, -k10], [-k01, k00]]
    Mat2 lam;
    lam[0][0] = k[0][0] * k[1][1] / det;
    lam[0][1] = k[0][1] * (-k[1][0]) / det;
    lam[1][0] = k[1][0] * (-k[0][1]) / det;
    lam[1][1] = k[1][1] * k[0][0] / det;
    return lam;
}

/// Settings for the open-loop response experiment behind the gain matrix.
struct GainExperiment {
    Action base{340.0, 100.0};      ///< nominal operating point
    double step_f_in = 0.2;         ///< perturbation on F_in (m^3/min)
    double step_t_c = 2.0;          ///< perturbation on T_c (K)
    int repeats = 3;                ///< noisy repetitions to average
    NoiseConfig noise{};            ///< measurement noise on the recorded outputs
    int horizon_steps = 480;        ///< response horizon (control intervals)
    double settle_tol = 1e-6;       ///< max |dX/dt| over non-volume states at the end
};

namespace detail {

/// Runs the plant under a constant action and returns the noisy terminal
/// [C_B, V] measurement. Settling is checked on the non-volume states only
/// (volume is a pure integrator in F_in).
inline std::array<double, 2> open_loop_response(const Action& u, const GainExperiment& ex,
                                                const CstrParams& p, std::uint64_t seed) {
    FullState s{0.0, 0.0, 0.0, 327.0, 102.0};
    for (int i = 0; i < ex.horizon_steps; ++i)
        s = integrate_step(s, u, kControlDt, 10, p, p.c_a_in);
    // With unbalanced flows the volume integrates and the other states drift
    // quasi-steadily, so the settle check only applies to flow-balanced runs.
    if (std::abs(u.f_in - p.f_out) < 1e-12) {
        const FullState d = cstr_rhs(s, u, p, p.c_a_in);
        const double rate =
            std::max({std::abs(d.c_a), std::abs(d.c_b), std::abs(d.c_c), std::abs(d.temp)});
        if (rate > ex.settle_tol)
            throw NonConvergenceError("open_loop_response: plant not settled, |dx/dt| = " +
                                      std::to_string(rate));
    }
    Rng rng(seed);
    const Measurement m = observe(s, ex.noise, rng);
    return {m.c_b, m.vol};
}

} // namespace detail

/// Finite-difference open-loop gain matrix, outputs [C_B, V] by inputs
/// [F_in, T_c], averaged over `repeats` noisy repetitions.
inline Mat2 steady_state_gain_matrix(const GainExperiment& ex, const CstrParams& p = {},
                                     std::uint64_t seed = 0) {
    Mat2 k{{{0.0, 0.0}, {0.0, 0.0}}};
    for (int rep = 0; rep < ex.repeats; ++rep) {
        const std::uint64_t s0 = mix_seed(seed + 3 * rep);
        const auto y0 = detail::open_loop_response(ex.base, ex, p, s0);
        const Action du_f{ex.base.t_c, ex.base.f_in + ex.step_f_in};
        const auto yf = detail::open_loop_response(du_f, ex, p, mix_seed(seed + 3 * rep + 1));
        const Action du_t{ex.base.t_c + ex.step_t_c, ex.base.f_in};
        const auto yt = detail::open_loop_response(du_t, ex, p, mix_seed(seed + 3 * rep + 2));
        k[0][0] += (yf[0] - y0[0]) / ex.step_f_in;
        k[1][0] += (yf[1] - y0[1]) / ex.step_f_in;
        k[0][1] += (yt[0] - y0[0]) / ex.step_t_c;
        k[1][1] += (yt[1] - y0[1]) / ex.step_t_c;
    }
    for (auto& row : k)
        for (auto& v : row) v /= ex.repeats;
    return k;
}

/// Steady-state C_B as a function of constant T_c at fixed V (F_in = F_out).
/// Backs the placement of the extended training setpoints.
inline double steady_state_cb(double t_c, const CstrParams& p = {}, int horizon_steps = 960) {
    FullState s{0.0, 0.0, 0.0, 327.0, 100.0};
    const Action u{t_c, p.f_out};
    for (int i = 0; i < horizon_steps; ++i)
        s = integrate_step(s, u, kControlDt, 10, p, p.c_a_in);
    return s.c_b;
}

struct OperatingPeak {
    double t_c;
    double c_b;
};

/// Sweeps T_c and returns the coolant temperature maximizing steady-state C_B.
inline OperatingPeak operating_curve_peak(double t_c_lo = ActionBounds::t_c_lo,
                                          double t_c_hi = ActionBounds::t_c_hi,
                                          double step = 1.0, const CstrParams& p = {}) {
    OperatingPeak peak{t_c_lo, -1.0};
    for (double t_c = t_c_lo; t_c <= t_c_hi + 1e-9; t_c += step) {
        const double cb = steady_state_cb(t_c, p);
        if (cb > peak.c_b) peak = {t_c, cb};
    }
    return peak;
}

} // namespace cirl
