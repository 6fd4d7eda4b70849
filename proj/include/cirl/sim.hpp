#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "cirl/errors.hpp"
#include "cirl/rng.hpp"

namespace cirl {

/// Complete reactor state advanced by the integrator.
struct FullState {
    double c_a;   ///< concentration of A (mol/m^3)
    double c_b;   ///< concentration of B (mol/m^3)
    double c_c;   ///< concentration of C (mol/m^3)
    double temp;  ///< reactor temperature (K)
    double vol;   ///< reactor volume (m^3)
};

/// Physical constants of the reactor model. Time unit is minutes throughout.
struct CstrParams {
    double t_f = 350.0;           ///< feed temperature (K)
    double c_a_in = 1.0;          ///< feed concentration of A (mol/m^3)
    double f_out = 100.0;         ///< outlet flow (m^3/min)
    double rho = 1000.0;          ///< density (kg/m^3)
    double c_p = 0.239;           ///< heat capacity (J/kg K)
    double ua = 5.0e4;            ///< heat transfer coefficient x area (W/K)
    double dh_a = 5.0e3;          ///< heat of reaction A->B (J/mol)
    double dh_b = 4.0e3;          ///< heat of reaction B->C (J/mol)
    double e_a_over_r = 8750.0;   ///< activation energy over R, reaction A (K)
    double e_b_over_r = 10750.0;  ///< activation energy over R, reaction B (K)
    double k_a = 7.2e10;          ///< Arrhenius pre-exponential, reaction A (1/min)
    double k_b = 8.2e10;          ///< Arrhenius pre-exponential, reaction B (1/min)
};

/// Manipulated inputs: coolant temperature and inlet flow.
struct Action {
    double t_c;   ///< coolant temperature (K)
    double f_in;  ///< inlet flow (m^3/min)
};

struct ActionBounds {
    static constexpr double t_c_lo = 290.0;
    static constexpr double t_c_hi = 450.0;
    static constexpr double f_in_lo = 99.0;
    static constexpr double f_in_hi = 105.0;
};

inline Action clamp_action(const Action& u) {
    return {std::clamp(u.t_c, ActionBounds::t_c_lo, ActionBounds::t_c_hi),
            std::clamp(u.f_in, ActionBounds::f_in_lo, ActionBounds::f_in_hi)};
}

/// Min-max normalization ranges spanning the operating space.
struct Ranges {
    double cb_lo = 0.0, cb_hi = 1.0;
    double t_lo = 300.0, t_hi = 450.0;
    double v_lo = 95.0, v_hi = 110.0;

    double norm_cb(double cb) const { return (cb - cb_lo) / (cb_hi - cb_lo); }
    double norm_t(double t) const { return (t - t_lo) / (t_hi - t_lo); }
    double norm_v(double v) const { return (v - v_lo) / (v_hi - v_lo); }
    double norm_tc(double tc) const {
        return (tc - ActionBounds::t_c_lo) / (ActionBounds::t_c_hi - ActionBounds::t_c_lo);
    }
    double norm_fin(double fin) const {
        return (fin - ActionBounds::f_in_lo) / (ActionBounds::f_in_hi - ActionBounds::f_in_lo);
    }
};

struct ReactionRates {
    double r_a;  ///< A -> B rate (mol/m^3/min)
    double r_b;  ///< B -> C rate (mol/m^3/min)
};

inline ReactionRates reaction_rates(const FullState& s, const CstrParams& p) {
    if (!std::isfinite(s.temp) || !std::isfinite(s.c_a) || !std::isfinite(s.c_b))
        throw std::domain_error("reaction_rates: non-finite state");
    if (s.temp <= 0.0) throw std::domain_error("reaction_rates: temperature must be positive");
    return {p.k_a * std::exp(-p.e_a_over_r / s.temp) * s.c_a,
            p.k_b * std::exp(-p.e_b_over_r / s.temp) * s.c_b};
}

/// Right-hand side of the five reactor ODEs. c_a_in_eff carries the feed
/// disturbance; equals p.c_a_in in the undisturbed plant.
inline FullState cstr_rhs(const FullState& s, const Action& u, const CstrParams& p,
                          double c_a_in_eff) {
    if (s.vol <= 0.0) throw DivergenceError("cstr_rhs: singular volume");
    const auto [r_a, r_b] = reaction_rates(s, p);
    FullState d;
    d.c_a = (u.f_in * c_a_in_eff - p.f_out * s.c_a) / s.vol - r_a;
    d.c_b = r_a - r_b - p.f_out * s.c_b / s.vol;
    d.c_c = r_b - p.f_out * s.c_c / s.vol;
    d.temp = u.f_in * (p.t_f - s.temp) / s.vol + (p.dh_a / (p.rho * p.c_p)) * r_a +
             (p.dh_b / (p.rho * p.c_p)) * r_b +
             p.ua * (u.t_c - s.temp) / (s.vol * p.rho * p.c_p);
    d.vol = u.f_in - p.f_out;
    return d;
}

namespace detail {

inline FullState axpy(const FullState& x, double a, const FullState& d) {
    return {x.c_a + a * d.c_a, x.c_b + a * d.c_b, x.c_c + a * d.c_c, x.temp + a * d.temp,
            x.vol + a * d.vol};
}

inline bool finite(const FullState& s) {
    return std::isfinite(s.c_a) && std::isfinite(s.c_b) && std::isfinite(s.c_c) &&
           std::isfinite(s.temp) && std::isfinite(s.vol);
}

} // namespace detail

/// Advances the state by dt using `substeps` classical RK4 steps with the
/// action held constant. Concentrations are clamped to >= 0 afterwards.
inline FullState integrate_step(FullState s, const Action& u, double dt, int substeps,
                                const CstrParams& p, double c_a_in_eff) {
    if (dt <= 0.0) throw std::domain_error("integrate_step: dt must be positive");
    if (substeps < 1) throw std::domain_error("integrate_step: substeps must be >= 1");
    const double h = dt / substeps;
    for (int i = 0; i < substeps; ++i) {
        FullState k1, k2, k3, k4;
        try {
            k1 = cstr_rhs(s, u, p, c_a_in_eff);
            k2 = cstr_rhs(detail::axpy(s, h / 2, k1), u, p, c_a_in_eff);
            k3 = cstr_rhs(detail::axpy(s, h / 2, k2), u, p, c_a_in_eff);
            k4 = cstr_rhs(detail::axpy(s, h, k3), u, p, c_a_in_eff);
        } catch (const std::domain_error& e) {
            // an unstable step drove the state out of the model's domain
            throw DivergenceError(std::string("integrate_step: ") + e.what() + " at substep " +
                                  std::to_string(i));
        }
        s.c_a += h / 6 * (k1.c_a + 2 * k2.c_a + 2 * k3.c_a + k4.c_a);
        s.c_b += h / 6 * (k1.c_b + 2 * k2.c_b + 2 * k3.c_b + k4.c_b);
        s.c_c += h / 6 * (k1.c_c + 2 * k2.c_c + 2 * k3.c_c + k4.c_c);
        s.temp += h / 6 * (k1.temp + 2 * k2.temp + 2 * k3.temp + k4.temp);
        s.vol += h / 6 * (k1.vol + 2 * k2.vol + 2 * k3.vol + k4.vol);
        if (!detail::finite(s))
            throw DivergenceError("integrate_step: non-finite state at substep " +
                                  std::to_string(i));
    }
    s.c_a = std::max(s.c_a, 0.0);
    s.c_b = std::max(s.c_b, 0.0);
    s.c_c = std::max(s.c_c, 0.0);
    return s;
}

/// Measured channels fed back to the controller.
struct Measurement {
    double c_b;
    double temp;
    double vol;
};

/// Per-channel measurement noise standard deviations.
struct NoiseConfig {
    double c_b = 0.0;
    double temp = 0.0;
    double vol = 0.0;
};

/// Default noise: 1% of each state's normalization range.
inline NoiseConfig default_noise() { return {0.01, 1.5, 0.15}; }

/// True state plus zero-mean Gaussian noise, channels drawn in order
/// (c_b, temp, vol).
inline Measurement observe(const FullState& s, const NoiseConfig& n, Rng& rng) {
    Measurement m;
    m.c_b = s.c_b + (n.c_b > 0.0 ? rng.normal(0.0, n.c_b) : 0.0);
    m.temp = s.temp + (n.temp > 0.0 ? rng.normal(0.0, n.temp) : 0.0);
    m.vol = s.vol + (n.vol > 0.0 ? rng.normal(0.0, n.vol) : 0.0);
    return m;
}

/// Diagonal weights over normalized errors and normalized control moves.
struct RewardWeights {
    std::array<double, 2> q{1.0, 1.0};  ///< over [C_B, V] errors
    std::array<double, 2> r{0.0, 0.0};  ///< over [T_c, F_in] moves
};

/// r = -(e'Qe + du'R du) on normalized signals; always <= 0.
inline double reward(const std::array<double, 2>& e, const std::array<double, 2>& du,
                     const RewardWeights& w) {
    return -(w.q[0] * e[0] * e[0] + w.q[1] * e[1] * e[1] + w.r[0] * du[0] * du[0] +
             w.r[1] * du[1] * du[1]);
}

} // namespace cirl
