#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <unistd.h>

#include "epifor/io.hpp"

using namespace epifor;

namespace {

std::string temp_path(const std::string& stem) {
    static int counter = 0;
    return (std::filesystem::temp_directory_path() /
            (stem + "_" + std::to_string(++counter) + "_" + std::to_string(::getpid())))
        .string();
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& stem) : path(temp_path(stem)) {}
    ~TempFile() { std::filesystem::remove(path); }
};

bool has_violation(const io::ValidationReport& report, long line, const std::string& needle) {
    for (const auto& v : report.violations) {
        if (v.line == line && v.message.find(needle) != std::string::npos) return true;
    }
    return false;
}

bool repr_equal(const ForecastRepr& a, const ForecastRepr& b) {
    if (a.index() != b.index()) return false;
    if (const auto* p = std::get_if<PointForecast>(&a)) {
        return p->value == std::get<PointForecast>(b).value;
    }
    if (const auto* iv = std::get_if<IntervalForecast>(&a)) {
        const auto& o = std::get<IntervalForecast>(b);
        return iv->alpha == o.alpha && iv->lower == o.lower && iv->upper == o.upper;
    }
    if (const auto* bn = std::get_if<BinnedForecast>(&a)) {
        const auto& o = std::get<BinnedForecast>(b);
        return bn->edges == o.edges && bn->probs == o.probs;
    }
    return std::get<SampleForecast>(a).samples == std::get<SampleForecast>(b).samples;
}

} // namespace

TEST_CASE("incidence CSV round-trips locations, seasons, and covariates") {
    const std::string csv = "location,time_index,value,season,x_temp\n"
                            "north,7,1.5,w1,-3.25\n"
                            "north,8,0,w1,-1\n"
                            "north,9,12,w2,0.5\n"
                            "north,10,3,w2,2\n"
                            "south,1,4,,9\n"
                            "south,2,6,,10\n";
    const auto series = io::parse_incidence_csv(csv, 2);
    REQUIRE(series.size() == 2);

    const auto& north = series[0];
    CHECK(north.location() == "north");
    CHECK(north.t0() == 7);
    CHECK(north.cycle_length() == 2);
    CHECK(north.values() == std::vector<double>{1.5, 0.0, 12.0, 3.0});
    REQUIRE(north.seasons().size() == 2);
    CHECK(north.seasons()[0].label == "w1");
    CHECK(north.seasons()[0].first == 1);
    CHECK(north.seasons()[0].last == 2);
    CHECK(north.seasons()[1].first == 3);
    CHECK(north.seasons()[1].last == 4);
    REQUIRE(north.covariates().count("x_temp") == 1);
    CHECK(north.covariates().at("x_temp") == std::vector<double>{-3.25, -1.0, 0.5, 2.0});

    const auto& south = series[1];
    CHECK(south.t0() == 1);
    CHECK(south.length() == 2);
    CHECK(south.seasons().empty());
}

TEST_CASE("incidence violations carry line numbers and suppress output") {
    io::ValidationReport report;

    SUBCASE("time gaps") {
        const auto out = io::read_incidence_csv(
            "location,time_index,value\na,1,5\na,3,6\n", 1, report);
        CHECK(out.empty());
        CHECK(has_violation(report, 3, "gap in time_index for location a: 1 -> 3"));
    }
    SUBCASE("negative and non-numeric values") {
        io::read_incidence_csv("location,time_index,value\na,1,-2\na,2,why\n", 1, report);
        CHECK(has_violation(report, 2, "value must be finite and >= 0"));
        CHECK(has_violation(report, 3, "value is not a number"));
    }
    SUBCASE("unknown and missing header columns") {
        io::read_incidence_csv("location,time_index,value,extra\na,1,2,3\n", 1, report);
        CHECK(has_violation(report, 1, "unknown column 'extra'"));
        io::ValidationReport missing;
        io::read_incidence_csv("location,value\na,2\n", 1, missing);
        CHECK(has_violation(missing, 1, "header must name location,time_index,value"));
    }
    SUBCASE("ragged rows, empty locations, bad time index") {
        io::read_incidence_csv("location,time_index,value\na,1\n,2,3\na,x,3\n", 1, report);
        CHECK(has_violation(report, 2, "expected 3 fields, found 2"));
        CHECK(has_violation(report, 3, "empty location"));
        CHECK(has_violation(report, 4, "time_index is not an integer"));
    }
    SUBCASE("non-contiguous seasons") {
        io::read_incidence_csv("location,time_index,value,season\n"
                               "a,1,1,s1\na,2,1,s2\na,3,1,s1\n",
                               1, report);
        CHECK(has_violation(report, 2, "season 's1' is not contiguous"));
    }
    SUBCASE("bad covariates roll the row back") {
        io::read_incidence_csv("location,time_index,value,x_rain\na,1,2,wet\n", 1, report);
        CHECK(has_violation(report, 2, "covariate x_rain is not a number"));
    }
    SUBCASE("the throwing wrapper reports the same text") {
        CHECK_THROWS_WITH_AS(io::parse_incidence_csv("location,time_index,value\na,1,-2\n", 1),
                             doctest::Contains("value must be finite"), DataError);
    }
}

TEST_CASE("vintage CSV builds one triangle per location") {
    const std::string csv = "location,event_time,report_time,count_delta\n"
                            "north,5,5,3\n"
                            "north,5,7,4\n"
                            "north,6,7,2\n"
                            "south,1,9,1\n";
    const auto triangles = io::parse_vintage_csv(csv);
    REQUIRE(triangles.size() == 2);
    const auto& north = triangles.at("north");
    CHECK(north.finalized(5) == 7);
    CHECK(north.finalized(6) == 2);
    CHECK(north.counts().at(5).at(0) == 3);
    CHECK(north.counts().at(5).at(2) == 4);
    CHECK(triangles.at("south").counts().at(1).at(8) == 1);

    io::ValidationReport report;
    SUBCASE("reports before events are invalid") {
        io::read_vintage_csv("location,event_time,report_time,count_delta\na,5,4,1\n", report);
        CHECK(has_violation(report, 2, "report_time before event_time"));
    }
    SUBCASE("downward revisions are invalid") {
        const auto out = io::read_vintage_csv(
            "location,event_time,report_time,count_delta\na,5,6,-2\n", report);
        CHECK(out.empty());
        CHECK(has_violation(report, 2, "downward revision"));
    }
    SUBCASE("the header is fixed") {
        io::read_vintage_csv("location,event,report,delta\na,1,1,1\n", report);
        CHECK(has_violation(report, 1, "header must be"));
    }
}

TEST_CASE("vintage journal appends forward-moving reports only") {
    TempFile journal("epifor_journal");

    io::ValidationReport absent;
    CHECK(io::read_vintage_journal(journal.path, absent).empty());
    CHECK(absent.ok());

    io::append_vintage_journal(journal.path, {{"north", 5, 5, 3}, {"north", 5, 7, 4}});
    io::append_vintage_journal(journal.path, {{"north", 6, 8, 2}, {"south", 1, 2, 1}});

    io::ValidationReport report;
    const auto records = io::read_vintage_journal(journal.path, report);
    CHECK(report.ok());
    REQUIRE(records.size() == 4);
    CHECK(records[1].report_time == 7);
    CHECK(records[3].location == "south");

    SUBCASE("a backward report is refused and nothing is written") {
        CHECK_THROWS_WITH_AS(io::append_vintage_journal(journal.path, {{"north", 6, 6, 1}}),
                             doctest::Contains("move report_time backwards"), DataError);
        io::ValidationReport after;
        CHECK(io::read_vintage_journal(journal.path, after).size() == 4);
        // Other locations are unaffected by north's high-water mark.
        io::append_vintage_journal(journal.path, {{"south", 2, 3, 5}});
    }
    SUBCASE("reading flags hand-edited journals") {
        io::write_file(journal.path,
                       "{\"location\":\"a\",\"event_time\":1,\"report_time\":5,\"count_delta\":1}\n"
                       "{\"location\":\"a\",\"event_time\":2,\"report_time\":3,\"count_delta\":1}\n"
                       "not json\n"
                       "{\"location\":\"a\",\"event_time\":2,\"report_time\":6,\"count_delta\":1,"
                       "\"note\":\"hi\"}\n");
        io::ValidationReport edited;
        const auto kept = io::read_vintage_journal(journal.path, edited);
        CHECK(kept.size() == 1);
        CHECK(has_violation(edited, 2, "report_time moves backwards"));
        CHECK(edited.violations.size() == 3);
    }
}

TEST_CASE("forecast JSON round-trips every representation") {
    Forecast point;
    point.location = "north";
    point.origin_t = 12;
    point.target = Target::step_ahead(12, 3);
    point.repr = PointForecast{41.5};

    Forecast interval = point;
    interval.target = Target::threshold_exceedance(12, 2, 100.0);
    interval.repr = IntervalForecast{0.1, 30.0, 55.0};

    Forecast binned = point;
    binned.target = Target::peak_timing({"w2", 5, 8});
    binned.repr = BinnedForecast{{4.5, 5.5, 6.5, 7.5, 8.5}, {0.1, 0.2, 0.3, 0.4}};

    Forecast samples = point;
    samples.target = Target::peak_incidence({"w2", 5, 8});
    samples.repr = SampleForecast{{1.0, 2.0, 2.5}};

    for (const auto& original : {point, interval, binned, samples}) {
        const auto back = io::forecast_from_json(io::forecast_to_json(original));
        CHECK(back.location == original.location);
        CHECK(back.origin_t == original.origin_t);
        CHECK(back.target.describe() == original.target.describe());
        CHECK(repr_equal(back.repr, original.repr));
    }
}

TEST_CASE("forecast parsing rejects malformed documents") {
    const std::string valid = "{\"location\":\"n\",\"origin_t\":3,"
                              "\"target\":{\"kind\":\"step_ahead\",\"k\":1},"
                              "\"repr\":\"point\",\"value\":5.0}";
    CHECK(io::forecast_from_json(valid).location == "n");

    auto mutate = [&](const std::string& from, const std::string& to) {
        std::string doc = valid;
        doc.replace(doc.find(from), from.size(), to);
        return doc;
    };
    CHECK_THROWS_AS(io::forecast_from_json("{nope"), DataError);
    CHECK_THROWS_WITH_AS(io::forecast_from_json(mutate("\"value\":5.0", "\"val\":5.0")),
                         doctest::Contains("unknown"), DataError);
    CHECK_THROWS_AS(io::forecast_from_json(mutate("\"repr\":\"point\"", "\"repr\":\"fuzzy\"")),
                    DataError);
    CHECK_THROWS_AS(io::forecast_from_json(mutate("step_ahead\",\"k\":1", "sideways\",\"k\":1")),
                    DataError);
    CHECK_THROWS_AS(
        io::forecast_from_json(mutate("\"target\":{\"kind\":\"step_ahead\",\"k\":1},", "")),
        DataError);
    // Interval fields are not legal on a point forecast.
    CHECK_THROWS_AS(io::forecast_from_json(mutate("\"value\":5.0", "\"value\":5.0,\"alpha\":0.1")),
                    DataError);
    // Densities are validated, not just parsed.
    CHECK_THROWS_WITH_AS(
        io::forecast_from_json("{\"location\":\"n\",\"origin_t\":3,"
                               "\"target\":{\"kind\":\"step_ahead\",\"k\":1},"
                               "\"repr\":\"binned\",\"edges\":[0,1,2],\"probs\":[0.9,0.08]}"),
        doctest::Contains("0.98"), DataError);
}

TEST_CASE("a forecast file may hold one document or an array") {
    TempFile file("epifor_forecasts");
    Forecast f;
    f.location = "n";
    f.origin_t = 1;
    f.target = Target::step_ahead(1, 1);
    f.repr = PointForecast{2.0};

    io::write_file(file.path, io::forecast_to_json(f));
    CHECK(io::read_forecast_file(file.path).size() == 1);

    io::write_file(file.path,
                   "[" + io::forecast_to_json(f) + "," + io::forecast_to_json(f) + "]");
    CHECK(io::read_forecast_file(file.path).size() == 2);

    CHECK_THROWS_AS(io::read_forecast_file(temp_path("missing")), DataError);
}

TEST_CASE("score CSV appends one aggregate row per model and metric") {
    std::vector<io::ScoreRow> rows = {
        {"hw", "mae", "north", 4, "step_ahead(k=1;origin=4)", 1.5},
        {"hw", "mae", "south", 4, "step_ahead(k=1;origin=4)", 2.5},
        {"hw", "crps", "north", 4, "step_ahead(k=1;origin=4)", 0.25},
        {"base", "mae", "north", 4, "step_ahead(k=1;origin=4)", 4.0},
    };
    CHECK(io::score_csv(rows) == "model,metric,location,origin_t,target,score\n"
                                 "hw,mae,north,4,step_ahead(k=1;origin=4),1.5\n"
                                 "hw,mae,south,4,step_ahead(k=1;origin=4),2.5\n"
                                 "hw,crps,north,4,step_ahead(k=1;origin=4),0.25\n"
                                 "base,mae,north,4,step_ahead(k=1;origin=4),4\n"
                                 "hw,mae,ALL,,aggregate,2\n"
                                 "hw,crps,ALL,,aggregate,0.25\n"
                                 "base,mae,ALL,,aggregate,4\n");
}
