#include "epifor/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "epifor/common.hpp"
#include "epifor/errors.hpp"

namespace epifor::io {

namespace {

using nlohmann::json;

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream in(line);
    while (std::getline(in, field, sep)) fields.push_back(field);
    if (!line.empty() && line.back() == sep) fields.emplace_back();
    return fields;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string line;
    std::stringstream in(text);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

bool parse_long(const std::string& s, long& out) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

bool parse_real(const std::string& s, double& out) {
    if (s.empty()) return false;
    try {
        std::size_t used = 0;
        out = std::stod(s, &used);
        return used == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

void add_violation(ValidationReport& report, long line, std::string message) {
    report.violations.push_back({line, std::move(message)});
}

struct LocationRows {
    std::vector<long> time_index;
    std::vector<double> values;
    std::vector<std::string> season_labels;
    std::map<std::string, std::vector<double>> covariates;
    long first_line = 0;
};

void require_known_fields(const json& doc, const std::vector<std::string>& allowed,
                          const std::string& where) {
    for (const auto& [key, value] : doc.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw DataError("unknown field '" + key + "' in " + where);
        }
    }
}

json target_to_json(const Target& target) {
    json out;
    switch (target.kind) {
    case Target::Kind::StepAhead:
        out["kind"] = "step_ahead";
        out["k"] = target.k;
        break;
    case Target::Kind::PeakIncidence:
        out["kind"] = "peak_incidence";
        out["season"] = {{"label", target.season.label},
                         {"first", target.season.first},
                         {"last", target.season.last}};
        break;
    case Target::Kind::PeakTiming:
        out["kind"] = "peak_timing";
        out["season"] = {{"label", target.season.label},
                         {"first", target.season.first},
                         {"last", target.season.last}};
        break;
    case Target::Kind::ThresholdExceedance:
        out["kind"] = "threshold_exceedance";
        out["k"] = target.k;
        out["threshold"] = target.threshold;
        break;
    }
    return out;
}

Target target_from_json(const json& doc, long origin_t) {
    if (!doc.is_object() || !doc.contains("kind")) {
        throw DataError("forecast target must be an object with a 'kind'");
    }
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "step_ahead") {
        require_known_fields(doc, {"kind", "k"}, "step_ahead target");
        return Target::step_ahead(origin_t, doc.at("k").get<long>());
    }
    if (kind == "threshold_exceedance") {
        require_known_fields(doc, {"kind", "k", "threshold"}, "threshold_exceedance target");
        return Target::threshold_exceedance(origin_t, doc.at("k").get<long>(),
                                            doc.at("threshold").get<double>());
    }
    if (kind == "peak_incidence" || kind == "peak_timing") {
        require_known_fields(doc, {"kind", "season"}, kind + " target");
        const json& sj = doc.at("season");
        require_known_fields(sj, {"label", "first", "last"}, kind + " season");
        Season season;
        season.label = sj.value("label", "");
        season.first = sj.value("first", 0L);
        season.last = sj.value("last", 0L);
        Target t = kind == "peak_incidence" ? Target::peak_incidence(season)
                                            : Target::peak_timing(season);
        t.origin_t = origin_t;
        return t;
    }
    throw DataError("unknown target kind '" + kind + "'");
}

Forecast forecast_from_doc(const json& doc) {
    if (!doc.is_object()) throw DataError("forecast document must be a JSON object");
    for (const char* required : {"location", "origin_t", "target", "repr"}) {
        if (!doc.contains(required)) {
            throw DataError(std::string("forecast document missing '") + required + "'");
        }
    }
    Forecast f;
    f.location = doc.at("location").get<std::string>();
    f.origin_t = doc.at("origin_t").get<long>();
    f.target = target_from_json(doc.at("target"), f.origin_t);
    const std::string repr = doc.at("repr").get<std::string>();
    const std::vector<std::string> base = {"location", "origin_t", "target", "repr"};
    if (repr == "point") {
        auto allowed = base;
        allowed.push_back("value");
        require_known_fields(doc, allowed, "point forecast");
        f.repr = PointForecast{doc.at("value").get<double>()};
    } else if (repr == "interval") {
        auto allowed = base;
        allowed.insert(allowed.end(), {"alpha", "lower", "upper"});
        require_known_fields(doc, allowed, "interval forecast");
        f.repr = IntervalForecast{doc.at("alpha").get<double>(), doc.at("lower").get<double>(),
                                  doc.at("upper").get<double>()};
    } else if (repr == "binned") {
        auto allowed = base;
        allowed.insert(allowed.end(), {"edges", "probs"});
        require_known_fields(doc, allowed, "binned forecast");
        BinnedForecast b;
        b.edges = doc.at("edges").get<std::vector<double>>();
        b.probs = doc.at("probs").get<std::vector<double>>();
        const auto check = validate(b);
        if (!check.ok()) throw DataError("invalid binned forecast: " + check.violations.front());
        f.repr = std::move(b);
    } else if (repr == "samples") {
        auto allowed = base;
        allowed.push_back("samples");
        require_known_fields(doc, allowed, "sample forecast");
        SampleForecast s;
        s.samples = doc.at("samples").get<std::vector<double>>();
        const auto check = validate(s);
        if (!check.ok()) throw DataError("invalid sample forecast: " + check.violations.front());
        f.repr = std::move(s);
    } else {
        throw DataError("unknown forecast repr '" + repr + "'");
    }
    return f;
}

} // namespace

std::string ValidationReport::to_text() const {
    std::ostringstream out;
    for (const auto& v : violations) {
        out << "line " << v.line << ": " << v.message << "\n";
    }
    return out.str();
}

std::vector<TimeSeries> read_incidence_csv(const std::string& text, long cycle_length,
                                           ValidationReport& report) {
    const auto lines = split_lines(text);
    if (lines.empty()) {
        add_violation(report, 1, "empty file");
        return {};
    }
    const auto header = split(lines[0], ',');
    long col_location = -1, col_time = -1, col_value = -1, col_season = -1;
    std::map<std::string, long> covariate_cols;
    for (long i = 0; i < static_cast<long>(header.size()); ++i) {
        const std::string& name = header[static_cast<std::size_t>(i)];
        if (name == "location") col_location = i;
        else if (name == "time_index") col_time = i;
        else if (name == "value") col_value = i;
        else if (name == "season") col_season = i;
        else if (name.rfind("x_", 0) == 0) covariate_cols[name] = i;
        else add_violation(report, 1, "unknown column '" + name + "'");
    }
    if (col_location < 0 || col_time < 0 || col_value < 0) {
        add_violation(report, 1, "header must name location,time_index,value");
        return {};
    }

    std::map<std::string, LocationRows> by_location;
    std::vector<std::string> location_order;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const long line_no = static_cast<long>(li) + 1;
        if (lines[li].empty()) continue;
        const auto fields = split(lines[li], ',');
        if (fields.size() != header.size()) {
            add_violation(report, line_no, "expected " + std::to_string(header.size()) +
                                               " fields, found " + std::to_string(fields.size()));
            continue;
        }
        const std::string& location = fields[static_cast<std::size_t>(col_location)];
        if (location.empty()) {
            add_violation(report, line_no, "empty location");
            continue;
        }
        long t = 0;
        if (!parse_long(fields[static_cast<std::size_t>(col_time)], t)) {
            add_violation(report, line_no, "time_index is not an integer");
            continue;
        }
        double value = 0.0;
        if (!parse_real(fields[static_cast<std::size_t>(col_value)], value)) {
            add_violation(report, line_no, "value is not a number");
            continue;
        }
        if (!std::isfinite(value) || value < 0.0) {
            add_violation(report, line_no, "value must be finite and >= 0");
            continue;
        }
        auto [it, inserted] = by_location.try_emplace(location);
        if (inserted) location_order.push_back(location);
        LocationRows& rows = it->second;
        if (rows.time_index.empty()) {
            rows.first_line = line_no;
        } else if (t != rows.time_index.back() + 1) {
            add_violation(report, line_no,
                          "gap in time_index for location " + location + ": " +
                              std::to_string(rows.time_index.back()) + " -> " +
                              std::to_string(t));
            continue;
        }
        rows.time_index.push_back(t);
        rows.values.push_back(value);
        if (col_season >= 0) {
            rows.season_labels.push_back(fields[static_cast<std::size_t>(col_season)]);
        }
        bool covariates_ok = true;
        for (const auto& [name, col] : covariate_cols) {
            double x = 0.0;
            if (!parse_real(fields[static_cast<std::size_t>(col)], x)) {
                add_violation(report, line_no, "covariate " + name + " is not a number");
                covariates_ok = false;
                break;
            }
            rows.covariates[name].push_back(x);
        }
        if (!covariates_ok) {
            rows.time_index.pop_back();
            rows.values.pop_back();
            if (col_season >= 0) rows.season_labels.pop_back();
        }
    }
    if (!report.ok()) return {};

    std::vector<TimeSeries> out;
    for (const auto& location : location_order) {
        LocationRows& rows = by_location[location];
        std::vector<Season> seasons;
        for (std::size_t i = 0; i < rows.season_labels.size(); ++i) {
            const std::string& label = rows.season_labels[i];
            if (label.empty()) continue;
            if (!seasons.empty() && seasons.back().label == label &&
                seasons.back().last == static_cast<long>(i)) {
                seasons.back().last = static_cast<long>(i) + 1;
                continue;
            }
            for (const auto& s : seasons) {
                if (s.label == label) {
                    add_violation(report, rows.first_line,
                                  "season '" + label + "' is not contiguous for location " +
                                      location);
                }
            }
            seasons.push_back({label, static_cast<long>(i) + 1, static_cast<long>(i) + 1});
        }
        if (!report.ok()) return {};
        out.emplace_back(location, rows.time_index.front(), std::move(rows.values), cycle_length,
                         std::move(rows.covariates), std::move(seasons));
    }
    return out;
}

std::vector<TimeSeries> parse_incidence_csv(const std::string& text, long cycle_length) {
    ValidationReport report;
    auto series = read_incidence_csv(text, cycle_length, report);
    if (!report.ok()) {
        throw DataError("incidence CSV invalid:\n" + report.to_text());
    }
    return series;
}

std::map<std::string, ReportingTriangle> read_vintage_csv(const std::string& text,
                                                          ValidationReport& report) {
    const auto lines = split_lines(text);
    std::map<std::string, ReportingTriangle> out;
    if (lines.empty()) {
        add_violation(report, 1, "empty file");
        return out;
    }
    if (split(lines[0], ',') !=
        std::vector<std::string>{"location", "event_time", "report_time", "count_delta"}) {
        add_violation(report, 1, "header must be location,event_time,report_time,count_delta");
        return out;
    }
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const long line_no = static_cast<long>(li) + 1;
        if (lines[li].empty()) continue;
        const auto fields = split(lines[li], ',');
        if (fields.size() != 4) {
            add_violation(report, line_no, "expected 4 fields");
            continue;
        }
        long event_t = 0, report_t = 0, delta = 0;
        if (!parse_long(fields[1], event_t) || !parse_long(fields[2], report_t) ||
            !parse_long(fields[3], delta)) {
            add_violation(report, line_no, "event_time, report_time, count_delta must be integers");
            continue;
        }
        if (report_t < event_t) {
            add_violation(report, line_no, "report_time before event_time");
            continue;
        }
        if (delta < 0) {
            add_violation(report, line_no, "negative count_delta (downward revision) rejected");
            continue;
        }
        auto [it, inserted] = out.try_emplace(fields[0], fields[0]);
        it->second.add(event_t, report_t - event_t, delta);
    }
    if (!report.ok()) out.clear();
    return out;
}

std::map<std::string, ReportingTriangle> parse_vintage_csv(const std::string& text) {
    ValidationReport report;
    auto triangles = read_vintage_csv(text, report);
    if (!report.ok()) throw DataError("vintage CSV invalid:\n" + report.to_text());
    return triangles;
}

void append_vintage_journal(const std::string& path, const std::vector<VintageRecord>& records) {
    std::map<std::string, long> last_report;
    {
        ValidationReport report;
        for (const auto& rec : read_vintage_journal(path, report)) {
            last_report[rec.location] = std::max(last_report[rec.location], rec.report_time);
        }
        if (!report.ok()) throw DataError("vintage journal corrupt:\n" + report.to_text());
    }
    std::ofstream out(path, std::ios::app);
    if (!out) throw DataError("cannot open journal " + path);
    for (const auto& rec : records) {
        const auto it = last_report.find(rec.location);
        if (it != last_report.end() && rec.report_time < it->second) {
            throw DataError("journal append would move report_time backwards for location " +
                            rec.location);
        }
        last_report[rec.location] = rec.report_time;
        json doc = {{"location", rec.location},
                    {"event_time", rec.event_time},
                    {"report_time", rec.report_time},
                    {"count_delta", rec.count_delta}};
        out << doc.dump() << "\n";
    }
}

std::vector<VintageRecord> read_vintage_journal(const std::string& path,
                                                ValidationReport& report) {
    std::vector<VintageRecord> records;
    std::ifstream in(path);
    if (!in) return records; // absent journal = no records
    std::string line;
    long line_no = 0;
    std::map<std::string, long> last_report;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json doc;
        try {
            doc = json::parse(line);
            require_known_fields(doc, {"location", "event_time", "report_time", "count_delta"},
                                 "journal record");
            VintageRecord rec;
            rec.location = doc.at("location").get<std::string>();
            rec.event_time = doc.at("event_time").get<long>();
            rec.report_time = doc.at("report_time").get<long>();
            rec.count_delta = doc.at("count_delta").get<long>();
            const auto it = last_report.find(rec.location);
            if (it != last_report.end() && rec.report_time < it->second) {
                add_violation(report, line_no,
                              "report_time moves backwards for location " + rec.location);
                continue;
            }
            last_report[rec.location] = rec.report_time;
            records.push_back(std::move(rec));
        } catch (const std::exception& e) {
            add_violation(report, line_no, e.what());
        }
    }
    return records;
}

Forecast forecast_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const std::exception& e) {
        throw DataError(std::string("forecast JSON parse failure: ") + e.what());
    }
    return forecast_from_doc(doc);
}

std::string forecast_to_json(const Forecast& forecast) {
    json doc;
    doc["location"] = forecast.location;
    doc["origin_t"] = forecast.origin_t;
    doc["target"] = target_to_json(forecast.target);
    if (const auto* p = std::get_if<PointForecast>(&forecast.repr)) {
        doc["repr"] = "point";
        doc["value"] = p->value;
    } else if (const auto* iv = std::get_if<IntervalForecast>(&forecast.repr)) {
        doc["repr"] = "interval";
        doc["alpha"] = iv->alpha;
        doc["lower"] = iv->lower;
        doc["upper"] = iv->upper;
    } else if (const auto* b = std::get_if<BinnedForecast>(&forecast.repr)) {
        doc["repr"] = "binned";
        doc["edges"] = b->edges;
        doc["probs"] = b->probs;
    } else if (const auto* s = std::get_if<SampleForecast>(&forecast.repr)) {
        doc["repr"] = "samples";
        doc["samples"] = s->samples;
    }
    return doc.dump(2);
}

std::vector<Forecast> read_forecast_file(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const std::exception& e) {
        throw DataError("forecast file " + path + ": " + e.what());
    }
    std::vector<Forecast> out;
    if (doc.is_array()) {
        for (const auto& entry : doc) out.push_back(forecast_from_doc(entry));
    } else {
        out.push_back(forecast_from_doc(doc));
    }
    return out;
}

std::string score_csv(const std::vector<ScoreRow>& rows) {
    std::ostringstream out;
    out << "model,metric,location,origin_t,target,score\n";
    std::vector<std::pair<std::string, std::string>> order;
    std::map<std::pair<std::string, std::string>, std::pair<double, long>> totals;
    for (const auto& row : rows) {
        out << row.model << ',' << row.metric << ',' << row.location << ',' << row.origin_t << ','
            << row.target << ',' << format_double(row.score) << "\n";
        const auto key = std::make_pair(row.model, row.metric);
        auto [it, inserted] = totals.try_emplace(key, std::make_pair(0.0, 0L));
        if (inserted) order.push_back(key);
        it->second.first += row.score;
        it->second.second += 1;
    }
    for (const auto& key : order) {
        const auto& [sum, n] = totals[key];
        out << key.first << ',' << key.second << ",ALL,,aggregate,"
            << format_double(sum / static_cast<double>(n)) << "\n";
    }
    return out.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << content;
}

} // namespace epifor::io
