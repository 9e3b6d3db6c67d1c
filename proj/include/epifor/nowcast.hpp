#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "epifor/forecast.hpp"
#include "epifor/time_series.hpp"

namespace epifor {

/// Case counts cross-classified by event time and reporting delay. Counts
/// only accumulate: increments are non-negative, so later vintages dominate
/// earlier ones.
class ReportingTriangle {
public:
    explicit ReportingTriangle(std::string location_id) : location_id_(std::move(location_id)) {}

    const std::string& location() const { return location_id_; }

    /// Record `count` cases with the given event time, reported `delay`
    /// intervals later.
    void add(long event_t, long delay, long count);

    /// Total eventually-reported count for one event time.
    long finalized(long event_t) const;

    bool empty() const { return counts_.empty(); }
    long first_event() const;
    long last_event() const;
    long max_delay() const;

    const std::map<long, std::map<long, long>>& counts() const { return counts_; }

private:
    std::string location_id_;
    std::map<long, std::map<long, long>> counts_; // event_t -> delay -> count
};

/// The series as it was known at report_time: counts with
/// event_t + delay <= report_time, spanning the first event through
/// min(last event, report_time). Empty (nullopt) when nothing was
/// observable yet. Index 1 of every vintage is the triangle's first event
/// time, so season phase agrees across vintages.
std::optional<TimeSeries> as_of(const ReportingTriangle& triangle, long report_time,
                                long cycle_length = 1);

/// Expected cumulative fraction of eventual cases reported within each
/// delay, pi[0..max_delay], estimated from fully matured training events.
struct CompletenessProfile {
    std::vector<double> pi;

    /// Fraction reported by delay d (1 beyond the profile's last delay).
    double at(long d) const;
};

CompletenessProfile estimate_completeness(const ReportingTriangle& triangle, long from_event,
                                          long to_event);

/// Drop the last k observations, leaving only data old enough to be
/// considered complete. A k-step-ahead forecast of the dropped head is then
/// a nowcast.
TimeSeries truncate_incomplete(const TimeSeries& series, long k);

struct Nowcast {
    double point_estimate = 0.0;
    BinnedForecast density;
};

/// Completeness-scaled estimate of an incompletely reported count. The
/// reported count is modeled as a binomial thinning of the true count with
/// retention pi_d; inverting under a flat prior on the true count gives a
/// negative-binomial tail over the unreported remainder, discretized onto
/// unit bins. The density mean is (partial + 1)/pi_d - 1; the plug-in point
/// estimate is partial/pi_d.
Nowcast scale_nowcast(double partial_count, double pi_d);

} // namespace epifor
