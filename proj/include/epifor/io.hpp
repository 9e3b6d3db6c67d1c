#pragma once

#include <map>
#include <string>
#include <vector>

#include "epifor/forecast.hpp"
#include "epifor/nowcast.hpp"
#include "epifor/time_series.hpp"

namespace epifor::io {

struct Violation {
    long line = 0;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string to_text() const;
};

/// Incidence CSV: header `location,time_index,value` with optional `season`
/// and covariate columns prefixed `x_`. time_index must be consecutive
/// integers per location; the first time_index of a location becomes the
/// series' t0, anchoring its seasonal phase.
std::vector<TimeSeries> read_incidence_csv(const std::string& text, long cycle_length,
                                           ValidationReport& report);

/// Throwing wrapper; DataError carries the first violations.
std::vector<TimeSeries> parse_incidence_csv(const std::string& text, long cycle_length);

/// Vintage CSV: header `location,event_time,report_time,count_delta` with
/// report_time >= event_time and non-negative deltas.
std::map<std::string, ReportingTriangle> read_vintage_csv(const std::string& text,
                                                          ValidationReport& report);

std::map<std::string, ReportingTriangle> parse_vintage_csv(const std::string& text);

struct VintageRecord {
    std::string location;
    long event_time = 0;
    long report_time = 0;
    long count_delta = 0;
};

/// Append-only JSON-lines journal of vintage records. Appends reject
/// report times that move backwards for a location; reads validate the
/// same ordering.
void append_vintage_journal(const std::string& path, const std::vector<VintageRecord>& records);
std::vector<VintageRecord> read_vintage_journal(const std::string& path,
                                                ValidationReport& report);

/// Forecast interchange JSON: exactly the fields for the declared repr;
/// unknown fields are rejected.
Forecast forecast_from_json(const std::string& text);
std::string forecast_to_json(const Forecast& forecast);

/// A forecast file holds one document or an array of documents.
std::vector<Forecast> read_forecast_file(const std::string& path);

struct ScoreRow {
    std::string model;
    std::string metric;
    std::string location;
    long origin_t = 0;
    std::string target;
    double score = 0.0;
};

/// Score CSV with one row per case plus one aggregate (mean) row per
/// (model, metric), in first-appearance order.
std::string score_csv(const std::vector<ScoreRow>& rows);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace epifor::io
