#include "epifor/nowcast.hpp"

#include <algorithm>
#include <cmath>

#include "epifor/errors.hpp"

namespace epifor {

void ReportingTriangle::add(long event_t, long delay, long count) {
    if (delay < 0) throw ArgumentError("reporting delay must be >= 0");
    if (count < 0) {
        throw ArgumentError("count increments must be >= 0; downward revisions are not supported");
    }
    counts_[event_t][delay] += count;
}

long ReportingTriangle::finalized(long event_t) const {
    const auto it = counts_.find(event_t);
    if (it == counts_.end()) return 0;
    long total = 0;
    for (const auto& [delay, count] : it->second) total += count;
    return total;
}

long ReportingTriangle::first_event() const {
    if (counts_.empty()) throw LookupError("reporting triangle is empty");
    return counts_.begin()->first;
}

long ReportingTriangle::last_event() const {
    if (counts_.empty()) throw LookupError("reporting triangle is empty");
    return counts_.rbegin()->first;
}

long ReportingTriangle::max_delay() const {
    long d = 0;
    for (const auto& [event_t, by_delay] : counts_) {
        if (!by_delay.empty()) d = std::max(d, by_delay.rbegin()->first);
    }
    return d;
}

std::optional<TimeSeries> as_of(const ReportingTriangle& triangle, long report_time,
                                long cycle_length) {
    if (triangle.empty()) throw ArgumentError("cannot snapshot an empty reporting triangle");
    const long first = triangle.first_event();
    const long last = std::min(triangle.last_event(), report_time);
    if (last < first) return std::nullopt;
    std::vector<double> values(static_cast<std::size_t>(last - first + 1), 0.0);
    for (const auto& [event_t, by_delay] : triangle.counts()) {
        if (event_t > last) break;
        long known = 0;
        for (const auto& [delay, count] : by_delay) {
            if (event_t + delay <= report_time) known += count;
        }
        values[static_cast<std::size_t>(event_t - first)] = static_cast<double>(known);
    }
    return TimeSeries(triangle.location(), first, std::move(values), cycle_length);
}

double CompletenessProfile::at(long d) const {
    if (d < 0) throw ArgumentError("delay must be >= 0");
    if (pi.empty()) throw ArgumentError("empty completeness profile");
    if (d >= static_cast<long>(pi.size())) return 1.0;
    return pi[static_cast<std::size_t>(d)];
}

CompletenessProfile estimate_completeness(const ReportingTriangle& triangle, long from_event,
                                          long to_event) {
    if (from_event > to_event) throw ArgumentError("empty training event range");
    const long horizon = triangle.max_delay();
    std::vector<double> reported(static_cast<std::size_t>(horizon) + 1, 0.0);
    double total = 0.0;
    for (const auto& [event_t, by_delay] : triangle.counts()) {
        if (event_t < from_event || event_t > to_event) continue;
        for (const auto& [delay, count] : by_delay) {
            reported[static_cast<std::size_t>(delay)] += static_cast<double>(count);
            total += static_cast<double>(count);
        }
    }
    if (total <= 0.0) {
        throw DegenerateError("no finalized counts in the training event range");
    }
    CompletenessProfile profile;
    profile.pi.resize(reported.size());
    double cum = 0.0;
    for (std::size_t d = 0; d < reported.size(); ++d) {
        cum += reported[d];
        profile.pi[d] = cum / total;
    }
    profile.pi.back() = 1.0;
    return profile;
}

TimeSeries truncate_incomplete(const TimeSeries& series, long k) {
    if (k < 0) throw ArgumentError("truncation depth must be >= 0");
    if (k >= series.length()) {
        throw RangeError("cannot truncate " + std::to_string(k) + " of " +
                         std::to_string(series.length()) + " observations");
    }
    return train_view(series, series.length() - k);
}

Nowcast scale_nowcast(double partial_count, double pi_d) {
    if (!(partial_count >= 0.0)) throw ArgumentError("partial count must be >= 0");
    if (pi_d == 0.0) throw DegenerateError("completeness 0 leaves the true count unidentifiable");
    if (!(pi_d > 0.0 && pi_d <= 1.0)) throw ArgumentError("completeness must lie in (0, 1]");

    Nowcast out;
    out.point_estimate = partial_count / pi_d;

    auto unit_edges = [](double center_first, long bins) {
        std::vector<double> edges;
        edges.reserve(static_cast<std::size_t>(bins) + 1);
        for (long i = 0; i <= bins; ++i) {
            edges.push_back(center_first - 0.5 + static_cast<double>(i));
        }
        return edges;
    };

    if (pi_d == 1.0) {
        out.density.edges = unit_edges(partial_count, 1);
        out.density.probs = {1.0};
        return out;
    }

    // Unreported remainder m: with reported ~ Binomial(n, pi) and a flat
    // prior on n, m follows a negative binomial with r = partial + 1 and
    // success probability pi. True count bins sit at partial + m.
    const double r = partial_count + 1.0;
    std::vector<double> probs;
    double mass = std::pow(pi_d, r);
    double cum = 0.0;
    const double mean_m = r * (1.0 - pi_d) / pi_d;
    const long hard_cap = 1000 + static_cast<long>(20.0 * mean_m);
    for (long m = 0; m < hard_cap; ++m) {
        probs.push_back(mass);
        cum += mass;
        if (1.0 - cum < 1e-12 && m >= 1) break;
        mass *= (1.0 - pi_d) * (static_cast<double>(m) + r) / (static_cast<double>(m) + 1.0);
    }
    for (double& p : probs) p /= cum;
    out.density.edges = unit_edges(partial_count, static_cast<long>(probs.size()));
    out.density.probs = std::move(probs);
    return out;
}

} // namespace epifor
