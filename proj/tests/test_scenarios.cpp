#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "cirl/scenario.hpp"

using namespace cirl;

TEST_CASE("training set spans the expected setpoint plateaus in equal thirds") {
    const auto set = build_training_set();
    REQUIRE(set.size() == 3);
    std::multiset<double> cbs;
    for (const auto& s : set) {
        CHECK(s.n_s == 120);
        CHECK(s.schedule.total_steps() == 120);
        for (const auto& seg : s.schedule.segments) {
            CHECK(seg.steps == 40);
            CHECK(seg.v_sp == 100.0);
            cbs.insert(seg.cb_sp);
        }
    }
    const std::multiset<double> want{0.1, 0.25, 0.4, 0.55, 0.65, 0.75, 0.7, 0.75, 0.8};
    CHECK(cbs == want);
    CHECK(setpoint_at(set[0].schedule, 0).c_b == 0.1);
    CHECK(setpoint_at(set[1].schedule, 40).c_b == 0.65);
    CHECK(setpoint_at(set[2].schedule, 119).c_b == 0.8);
}

TEST_CASE("test scenario starts below the training minimum") {
    const auto s = build_test_scenario();
    CHECK(s.schedule.total_steps() == 120);
    CHECK(setpoint_at(s.schedule, 0).c_b == 0.075);
    CHECK(setpoint_at(s.schedule, 119).c_b == 0.75);
    for (const auto& seg : s.schedule.segments) CHECK(seg.v_sp == 100.0);
    CHECK(0.075 < 0.1);
}

TEST_CASE("setpoint lookup") {
    const auto s = build_test_scenario();
    SUBCASE("piecewise-constant values") {
        CHECK(setpoint_at(s.schedule, 0).c_b == 0.075);
        CHECK(setpoint_at(s.schedule, 39).c_b == 0.075);
        CHECK(setpoint_at(s.schedule, 40).c_b == 0.45);  // half-open boundary
        CHECK(setpoint_at(s.schedule, 80).c_b == 0.75);
        CHECK(setpoint_at(s.schedule, 119).vol == 100.0);
    }
    SUBCASE("out-of-range steps are rejected") {
        CHECK_THROWS_AS(setpoint_at(s.schedule, -1), std::out_of_range);
        CHECK_THROWS_AS(setpoint_at(s.schedule, 120), std::out_of_range);
    }
}

TEST_CASE("extended training set contains the initial one plus high setpoints") {
    const auto base = build_training_set();
    const auto ext = build_extended_training_set();
    REQUIRE(ext.size() == base.size() + 1);
    for (std::size_t i = 0; i < base.size(); ++i)
        CHECK(ext[i].schedule.segments.size() == base[i].schedule.segments.size());
    for (const auto& seg : ext.back().schedule.segments) CHECK(seg.cb_sp > 0.8);

    const auto hi = build_high_op_test_scenario();
    CHECK(setpoint_at(hi.schedule, 0).c_b == 0.45);
    CHECK(setpoint_at(hi.schedule, 119).c_b == 0.88);
}

TEST_CASE("disturbance scenarios") {
    const auto train = build_disturbance_training_set();
    REQUIRE(train.size() == 3);
    CHECK(train[0].disturbance[0].c_a_in == 1.5);
    CHECK(train[1].disturbance[0].c_a_in == 1.6);
    CHECK(train[2].disturbance[0].c_a_in == 1.9);
    const auto test = build_disturbance_test_scenario();
    CHECK(test.disturbance[0].c_a_in == 1.75);
    CHECK(test.disturbance[0].c_a_in > 1.6);
    CHECK(test.disturbance[0].c_a_in < 1.9);
    SUBCASE("step applies from mid-episode onward") {
        CHECK(test.c_a_in_at(0) == 1.0);
        CHECK(test.c_a_in_at(59) == 1.0);
        CHECK(test.c_a_in_at(60) == 1.75);
        CHECK(test.c_a_in_at(119) == 1.75);
    }
}

TEST_CASE("scenario json round trip") {
    auto s = build_disturbance_test_scenario();
    s.weights.q = {1.0, 0.5};
    const auto j = to_json(s);
    const auto t = scenario_from_json(j);
    CHECK(t.id == s.id);
    CHECK(t.n_s == s.n_s);
    CHECK(t.schedule.segments.size() == s.schedule.segments.size());
    CHECK(t.disturbance[0].c_a_in == 1.75);
    CHECK(t.weights.q[1] == 0.5);
    CHECK(t.noise.c_b == s.noise.c_b);
}

TEST_CASE("malformed scenario json is rejected") {
    auto j = to_json(build_test_scenario());
    SUBCASE("missing schedule") {
        j.erase("schedule");
        CHECK_THROWS_AS(scenario_from_json(j), DataError);
    }
    SUBCASE("durations must sum to n_s") {
        j["n_s"] = 121;
        CHECK_THROWS_AS(scenario_from_json(j), DataError);
    }
    SUBCASE("non-positive disturbance") {
        j["disturbance"] = {{10, -1.0}};
        CHECK_THROWS_AS(scenario_from_json(j), DataError);
    }
}

TEST_CASE("scenario id lookup") {
    CHECK(scenario_set_by_id("training").size() == 3);
    CHECK(scenario_set_by_id("test").size() == 1);
    CHECK(scenario_set_by_id("extended-training").size() == 4);
    CHECK(scenario_set_by_id("disturbance-training").size() == 3);
    CHECK_THROWS_AS(scenario_set_by_id("nope"), DataError);
}
