#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cirl/control.hpp"
#include "cirl/rng.hpp"

using namespace cirl;

namespace {

// Position-form reference: u_t = Kp e_t + (Kp/ti) dt * sum(e_0..e_t)
//                                + Kp td (e_t - e_{t-1}) / dt.
// The velocity form must be its exact first difference.
struct PositionPid {
    LoopGains g;
    double dt;
    double integral = 0.0;

    double output(double e_t, double e_tm1) {
        integral += e_t;
        return g.k_p * e_t + (g.k_p / std::max(g.tau_i, kTauIFloor)) * dt * integral +
               g.k_p * g.tau_d * (e_t - e_tm1) / dt;
    }
};

} // namespace

TEST_CASE("zero error history gives zero increment") {
    const LoopGains g{5.0, 2.0, 1.0};
    CHECK(pid_velocity_delta(g, {0.0, 0.0, 0.0}, 0.2) == 0.0);
}

TEST_CASE("velocity increment hand arithmetic") {
    const LoopGains g{2.0, 10.0, 0.0};
    const double du = pid_velocity_delta(g, {1.0, 0.5, 0.25}, 0.2);
    CHECK(du == doctest::Approx(2.0 * 0.5 + (2.0 / 10.0) * 1.0 * 0.2).epsilon(1e-12));
    CHECK(du == doctest::Approx(1.04).epsilon(1e-12));
}

TEST_CASE("tau_i = 0 stays finite via the epsilon floor") {
    const LoopGains g{1.0, 0.0, 0.0};
    const double du = pid_velocity_delta(g, {0.1, 0.1, 0.1}, 0.2);
    CHECK(std::isfinite(du));
    CHECK(du == doctest::Approx(0.1 * 0.2 / kTauIFloor));
}

TEST_CASE("accumulated velocity output matches the position form") {
    Rng rng(11);
    const double dt = 25.0 / 120.0;
    for (int trial = 0; trial < 50; ++trial) {
        const LoopGains g{rng.uniform(-5.0, 25.0), rng.uniform(0.01, 20.0),
                          rng.uniform(0.0, 10.0)};
        std::vector<double> e(120);
        for (auto& x : e) x = rng.uniform(-1.0, 1.0);

        PositionPid pos{g, dt};
        double u_vel = 0.0;
        double u_pos_prev = 0.0;
        bool first = true;
        double e_tm1 = e[0], e_tm2 = e[0];  // reset fill convention
        for (std::size_t t = 0; t < e.size(); ++t) {
            u_vel += pid_velocity_delta(g, {e[t], e_tm1, e_tm2}, dt);
            const double u_pos = pos.output(e[t], t == 0 ? e[0] : e[t - 1]);
            if (first) {
                // constant offset between the two forms, fixed at the first step
                u_pos_prev = u_pos - u_vel;
                first = false;
            }
            CHECK(std::abs(u_vel - (u_pos - u_pos_prev)) <
                  1e-9 * std::max(1.0, std::abs(u_vel)));
            e_tm2 = e_tm1;
            e_tm1 = e[t];
        }
    }
}

TEST_CASE("pid_apply") {
    const Action prev{340.0, 100.0};
    SUBCASE("zero deltas leave the action unchanged") {
        const auto u = pid_apply(prev, 0.0, 0.0);
        CHECK(u.t_c == prev.t_c);
        CHECK(u.f_in == prev.f_in);
    }
    SUBCASE("saturation at the upper bound") {
        const auto u = pid_apply({449.0, 100.0}, 10.0, 0.0);
        CHECK(u.t_c == 450.0);
    }
    SUBCASE("saturation is idempotent") {
        Rng rng(2);
        for (int i = 0; i < 100; ++i) {
            const Action p{rng.uniform(290.0, 450.0), rng.uniform(99.0, 105.0)};
            const double d1 = rng.uniform(-2.0, 2.0), d2 = rng.uniform(-2.0, 2.0);
            const auto once = pid_apply(p, d1, d2);
            const auto again = pid_apply(once, 0.0, 0.0);
            CHECK(again.t_c == once.t_c);
            CHECK(again.f_in == once.f_in);
        }
    }
    SUBCASE("normalized delta round-trips through the physical range") {
        const Ranges r;
        const double delta = 0.125;
        const auto u = pid_apply({340.0, 100.0}, delta, delta);
        CHECK(r.norm_tc(u.t_c) - r.norm_tc(340.0) == doctest::Approx(delta).epsilon(1e-12));
        CHECK(r.norm_fin(u.f_in) - r.norm_fin(100.0) == doctest::Approx(delta).epsilon(1e-12));
    }
}

TEST_CASE("zero error leaves any gain trajectory inert") {
    Rng rng(4);
    Observation obs;
    const Measurement m{0.4, 340.0, 100.0};
    obs.measured = {m, m, m};
    obs.setpoints = {{Setpoint{0.4, 100.0}, Setpoint{0.4, 100.0}, Setpoint{0.4, 100.0}}};
    for (int i = 0; i < 50; ++i) {
        const PidGainSet g{{rng.uniform(-5, 25), rng.uniform(0, 20), rng.uniform(0, 10)},
                           {rng.uniform(0, 1), rng.uniform(0, 2), rng.uniform(0, 1)}};
        const auto u = pid_step(g, obs, {340.0, 100.0}, 25.0 / 120.0);
        CHECK(u.t_c == doctest::Approx(340.0));
        CHECK(u.f_in == doctest::Approx(100.0));
    }
}

TEST_CASE("rga identity") {
    const Mat2 k{{{1.0, 0.0}, {0.0, 1.0}}};
    const auto lam = rga(k);
    CHECK(lam[0][0] == 1.0);
    CHECK(lam[0][1] == 0.0);
    CHECK(lam[1][0] == 0.0);
    CHECK(lam[1][1] == 1.0);
}

TEST_CASE("rga hand inversion oracle") {
    const Mat2 k{{{1.0, 2.0}, {3.0, 4.0}}};
    const auto lam = rga(k);
    CHECK(lam[0][0] == doctest::Approx(-2.0));
    CHECK(lam[0][1] == doctest::Approx(3.0));
    CHECK(lam[1][0] == doctest::Approx(3.0));
    CHECK(lam[1][1] == doctest::Approx(-2.0));
}

TEST_CASE("rga rows and columns sum to one") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        Mat2 k;
        for (auto& row : k)
            for (auto& v : row) v = rng.uniform(-3.0, 3.0);
        Mat2 lam;
        try {
            lam = rga(k);
        } catch (const SingularMatrixError&) {
            continue;
        }
        CHECK(lam[0][0] + lam[0][1] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(lam[1][0] + lam[1][1] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(lam[0][0] + lam[1][0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(lam[0][1] + lam[1][1] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("singular gain matrix is rejected") {
    const Mat2 k{{{1.0, 2.0}, {2.0, 4.0}}};
    CHECK_THROWS_AS(rga(k), SingularMatrixError);
}

TEST_CASE("gain matrix: no chemistry means no C_B response") {
    CstrParams p;
    p.k_a = 0.0;
    p.k_b = 0.0;
    GainExperiment ex;
    ex.repeats = 1;
    const auto k = steady_state_gain_matrix(ex, p);
    // feed A passes through untouched, so C_B never leaves zero
    CHECK(k[0][1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::abs(k[0][0]) < 1e-9);
}

TEST_CASE("volume does not respond to coolant temperature") {
    GainExperiment ex;
    ex.repeats = 1;
    const auto k = steady_state_gain_matrix(ex);
    CHECK(k[1][1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::abs(k[1][0]) > 1.0);  // integrating response to F_in
}

TEST_CASE("gain matrix is reproducible at zero noise") {
    GainExperiment ex;
    ex.repeats = 1;
    const auto k1 = steady_state_gain_matrix(ex, {}, 0);
    const auto k2 = steady_state_gain_matrix(ex, {}, 123);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            if (std::abs(k1[i][j]) > 1e-12)
                CHECK(std::abs(k1[i][j] - k2[i][j]) / std::abs(k1[i][j]) < 0.02);
}
