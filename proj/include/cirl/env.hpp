#pragma once

#include <algorithm>
#include <array>
#include <cstdint>

#include "cirl/scenario.hpp"
#include "cirl/sim.hpp"

namespace cirl {

/// Three-timestep history of measurements and setpoints, index 0 = newest.
struct Observation {
    std::array<Measurement, 3> measured;
    std::array<Setpoint, 3> setpoints;
};

/// Control interval: 25 minutes over 120 steps.
inline constexpr double kControlDt = 25.0 / 120.0;

/// Step/reset environment around the reactor model. Each instance owns its
/// state and noise stream; (scenario, seed, action sequence) fully determines
/// every observation and reward.
class Environment {
public:
    struct StepResult {
        Observation obs;
        double reward = 0.0;
        bool done = false;
        FullState true_state{};
        Setpoint setpoint{};
        Action applied{};
    };

    Environment(Scenario scenario, std::uint64_t seed, int substeps = 10,
                CstrParams params = {})
        : scenario_(std::move(scenario)), params_(params), substeps_(substeps), rng_(seed) {
        reset(seed);
    }

    Observation reset(std::uint64_t seed) {
        rng_ = Rng(seed);
        state_ = {0.0, 0.0, 0.0, 327.0, 102.0};
        prev_action_ = {370.0, 102.0};
        step_index_ = 0;
        done_ = false;
        const Measurement m0 = observe(state_, scenario_.noise, rng_);
        const Setpoint sp0 = setpoint_at(scenario_.schedule, 0);
        history_.measured = {m0, m0, m0};
        history_.setpoints = {sp0, sp0, sp0};
        return history_;
    }

    StepResult step(const Action& u_raw) {
        if (done_) throw ProtocolError("Environment::step: episode already done");
        const Action u = clamp_action(u_raw);
        const double c_a_in_eff = scenario_.c_a_in_at(step_index_, params_.c_a_in);
        state_ = integrate_step(state_, u, kControlDt, substeps_, params_, c_a_in_eff);
        ++step_index_;
        done_ = step_index_ >= scenario_.n_s;

        const Measurement m = observe(state_, scenario_.noise, rng_);
        const Setpoint sp =
            setpoint_at(scenario_.schedule, std::min(step_index_, scenario_.n_s - 1));
        history_.measured = {m, history_.measured[0], history_.measured[1]};
        history_.setpoints = {sp, history_.setpoints[0], history_.setpoints[1]};

        const std::array<double, 2> e{ranges_.norm_cb(sp.c_b) - ranges_.norm_cb(m.c_b),
                                      ranges_.norm_v(sp.vol) - ranges_.norm_v(m.vol)};
        const std::array<double, 2> du{
            ranges_.norm_tc(u.t_c) - ranges_.norm_tc(prev_action_.t_c),
            ranges_.norm_fin(u.f_in) - ranges_.norm_fin(prev_action_.f_in)};
        prev_action_ = u;

        return {history_, reward(e, du, scenario_.weights), done_, state_, sp, u};
    }

    const Observation& observation() const { return history_; }
    const FullState& true_state() const { return state_; }
    const Action& prev_action() const { return prev_action_; }
    int step_index() const { return step_index_; }
    bool done() const { return done_; }
    const Scenario& scenario() const { return scenario_; }
    const Ranges& ranges() const { return ranges_; }

private:
    Scenario scenario_;
    CstrParams params_;
    int substeps_;
    Ranges ranges_;
    FullState state_{};
    Observation history_{};
    Action prev_action_{};
    int step_index_ = 0;
    bool done_ = false;
    Rng rng_;
};

} // namespace cirl
