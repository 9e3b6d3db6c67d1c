#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epifor/time_series.hpp"

using namespace epifor;

namespace {

TimeSeries make(std::vector<double> values, long t0 = 1, long L = 4) {
    return TimeSeries("loc", t0, std::move(values), L);
}

} // namespace

TEST_CASE("construction enforces invariants") {
    CHECK_THROWS_AS(make({}), ArgumentError);
    CHECK_THROWS_AS(make({1.0, -0.5}), ArgumentError);
    CHECK_THROWS_AS(TimeSeries("loc", 1, {1.0}, 0), ArgumentError);
    CHECK_THROWS_AS(
        TimeSeries("loc", 1, {1.0, 2.0}, 2, {{"x_rain", {0.1}}}), ArgumentError);
    CHECK_THROWS_AS(
        TimeSeries("loc", 1, {1.0, 2.0}, 2, {}, {{"s1", 1, 3}}), ArgumentError);
    const TimeSeries ok("loc", 1, {1.0, 2.0}, 2, {{"x_rain", {0.1, 0.2}}}, {{"s1", 1, 2}});
    CHECK(ok.length() == 2);
    CHECK(ok.season("s1").last == 2);
    CHECK_THROWS_AS(ok.season("nope"), LookupError);
}

TEST_CASE("value lookup is 1-based and range checked") {
    const auto s = make({5.0, 6.0, 7.0});
    CHECK(s.value(1) == 5.0);
    CHECK(s.value(3) == 7.0);
    CHECK_THROWS_AS(s.value(0), RangeError);
    CHECK_THROWS_AS(s.value(4), RangeError);
}

TEST_CASE("realized peak incidence is the season maximum") {
    const auto s = make({1.0, 3.0, 2.0});
    const auto r = realized_target(s, Target::peak_incidence({"all", 1, 3}));
    CHECK(std::get<double>(r) == 3.0);
}

TEST_CASE("realized peak timing returns the full tie set") {
    const auto s = make({3.0, 1.0, 3.0});
    const auto r = realized_target(s, Target::peak_timing({"all", 1, 3}));
    CHECK(std::get<std::vector<long>>(r) == std::vector<long>{1, 3});
}

TEST_CASE("negative step offsets read history") {
    const auto s = make({1.0, 2.0, 3.0, 7.0, 5.0});
    const auto r = realized_target(s, Target::step_ahead(5, -1));
    CHECK(std::get<double>(r) == 7.0);
}

TEST_CASE("threshold exceedance is strict") {
    const auto s = make({1.0, 2.0, 3.0, 25.0});
    CHECK(std::get<bool>(realized_target(s, Target::threshold_exceedance(3, 1, 10.0))));
    CHECK_FALSE(std::get<bool>(realized_target(s, Target::threshold_exceedance(3, 1, 25.0))));
}

TEST_CASE("out-of-range targets raise range errors naming the index") {
    const auto s = make({1.0, 2.0});
    CHECK_THROWS_AS(realized_target(s, Target::step_ahead(2, 1)), RangeError);
    CHECK_THROWS_WITH_AS(realized_target(s, Target::step_ahead(2, 5)),
                         doctest::Contains("7"), RangeError);
}

TEST_CASE("unresolved season labels raise lookup errors") {
    const auto s = make({1.0, 2.0});
    Season unresolved;
    unresolved.label = "missing";
    CHECK_THROWS_AS(realized_target(s, Target::peak_incidence(unresolved)), LookupError);
}

TEST_CASE("peak incidence equals the value at every peak-timing index") {
    const auto s = make({2.0, 9.0, 4.0, 9.0, 1.0, 0.0, 9.0, 3.0});
    const Season all{"all", 1, 8};
    const double peak = std::get<double>(realized_target(s, Target::peak_incidence(all)));
    const auto ties =
        std::get<std::vector<long>>(realized_target(s, Target::peak_timing(all)));
    REQUIRE(ties.size() == 3);
    for (long t : ties) CHECK(s.value(t) == peak);
}

TEST_CASE("step-ahead realization depends only on the absolute index") {
    const auto s = make({1.0, 2.0, 3.0, 4.0, 5.0});
    const auto a = realized_target(s, Target::step_ahead(2, 2));
    const auto b = realized_target(s, Target::step_ahead(3, 1));
    CHECK(std::get<double>(a) == std::get<double>(b));
}

TEST_CASE("train_view returns a prefix and leaves the original intact") {
    const TimeSeries s("loc", 1, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 5,
                       {{"x_rain", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}}},
                       {{"s1", 1, 5}, {"s2", 6, 10}});
    const auto full = train_view(s, 10);
    CHECK(full.length() == 10);
    CHECK(full.values() == s.values());

    const auto head = train_view(s, 3);
    CHECK(head.length() == 3);
    CHECK(head.values() == std::vector<double>{1, 2, 3});
    CHECK(head.covariates().at("x_rain").size() == 3);
    CHECK(head.seasons().empty()); // s1 extends past index 3
    CHECK(s.length() == 10);

    CHECK_THROWS_AS(train_view(s, 0), RangeError);
    CHECK_THROWS_AS(train_view(s, 11), RangeError);
}

TEST_CASE("train_view is idempotent") {
    const auto s = make({1, 2, 3, 4, 5, 6});
    const auto once = train_view(s, 4);
    const auto twice = train_view(once, 4);
    CHECK(once.values() == twice.values());
    CHECK(once.t0() == twice.t0());
}

TEST_CASE("season_index follows the cycle formula") {
    CHECK(season_index(TimeSeries("loc", 1, std::vector<double>(13, 1.0), 12), 13) == 1);
    CHECK(season_index(TimeSeries("loc", 1, std::vector<double>(12, 1.0), 12), 12) == 12);
    CHECK(season_index(TimeSeries("loc", 3, {1.0}, 4), 1) == 3);
    CHECK_THROWS_AS(season_index(make({1.0}), 0), RangeError);
}

TEST_CASE("season_index agrees between a series and its train views") {
    const TimeSeries s("loc", 7, std::vector<double>(20, 1.0), 6);
    const auto head = train_view(s, 9);
    for (long t = 1; t <= 9; ++t) CHECK(season_index(s, t) == season_index(head, t));
}

TEST_CASE("access audit records the largest index read") {
    TimeSeries s = make({1, 2, 3, 4, 5});
    auto audit = std::make_shared<AccessAudit>();
    s.set_audit(audit);
    s.value(2);
    CHECK(audit->max_index.load() == 2);
    const auto head = train_view(s, 4);
    head.value(3);
    CHECK(audit->max_index.load() == 3);
    head.values();
    CHECK(audit->max_index.load() == 4);
}
