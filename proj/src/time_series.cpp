#include "epifor/time_series.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace epifor {

namespace {

std::string index_range_message(long t, long T) {
    std::ostringstream out;
    out << "time index " << t << " outside [1, " << T << "]";
    return out.str();
}

} // namespace

TimeSeries::TimeSeries(std::string location_id, long t0, std::vector<double> values,
                       long cycle_length, std::map<std::string, std::vector<double>> covariates,
                       std::vector<Season> seasons)
    : location_id_(std::move(location_id)),
      t0_(t0),
      values_(std::move(values)),
      cycle_length_(cycle_length),
      covariates_(std::move(covariates)),
      seasons_(std::move(seasons)) {
    if (values_.empty()) throw ArgumentError("time series must hold at least one observation");
    if (cycle_length_ < 1) throw ArgumentError("cycle_length must be >= 1");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
            std::ostringstream out;
            out << "value at index " << (i + 1) << " must be finite and >= 0";
            throw ArgumentError(out.str());
        }
    }
    for (const auto& [name, column] : covariates_) {
        if (column.size() != values_.size()) {
            throw ArgumentError("covariate '" + name + "' does not align with time indices");
        }
    }
    for (const auto& s : seasons_) {
        if (!s.resolved() || s.last > length()) {
            throw ArgumentError("season '" + s.label + "' range invalid for series of length " +
                                std::to_string(length()));
        }
    }
}

double TimeSeries::value(long t) const {
    if (t < 1 || t > length()) throw RangeError(index_range_message(t, length()));
    if (audit_) audit_->record(t + audit_offset_);
    return values_[static_cast<std::size_t>(t - 1)];
}

const std::vector<double>& TimeSeries::values() const {
    if (audit_) audit_->record(length() + audit_offset_);
    return values_;
}

const Season& TimeSeries::season(const std::string& label) const {
    for (const auto& s : seasons_) {
        if (s.label == label) return s;
    }
    throw LookupError("season '" + label + "' not defined for location " + location_id_);
}

Target Target::step_ahead(long origin_t, long k) {
    Target t;
    t.kind = Kind::StepAhead;
    t.origin_t = origin_t;
    t.k = k;
    return t;
}

Target Target::peak_incidence(Season season) {
    Target t;
    t.kind = Kind::PeakIncidence;
    t.season = std::move(season);
    return t;
}

Target Target::peak_timing(Season season) {
    Target t;
    t.kind = Kind::PeakTiming;
    t.season = std::move(season);
    return t;
}

Target Target::threshold_exceedance(long origin_t, long k, double threshold) {
    Target t;
    t.kind = Kind::ThresholdExceedance;
    t.origin_t = origin_t;
    t.k = k;
    t.threshold = threshold;
    return t;
}

std::string Target::describe() const {
    std::ostringstream out;
    switch (kind) {
    case Kind::StepAhead:
        out << "step_ahead(k=" << k << ";origin=" << origin_t << ")";
        break;
    case Kind::PeakIncidence:
        out << "peak_incidence(season=" << season.label << ")";
        break;
    case Kind::PeakTiming:
        out << "peak_timing(season=" << season.label << ")";
        break;
    case Kind::ThresholdExceedance:
        out << "threshold_exceedance(k=" << k << ";C=" << threshold << ";origin=" << origin_t
            << ")";
        break;
    }
    return out.str();
}

namespace {

Season resolve_season(const TimeSeries& series, const Season& season) {
    Season s = season.resolved() ? season : series.season(season.label);
    if (s.first < 1 || s.last > series.length()) {
        throw RangeError("season '" + s.label + "' spans [" + std::to_string(s.first) + ", " +
                         std::to_string(s.last) + "] outside series of length " +
                         std::to_string(series.length()));
    }
    return s;
}

} // namespace

Realized realized_target(const TimeSeries& series, const Target& target) {
    switch (target.kind) {
    case Target::Kind::StepAhead:
        return series.value(target.origin_t + target.k);
    case Target::Kind::ThresholdExceedance:
        return series.value(target.origin_t + target.k) > target.threshold;
    case Target::Kind::PeakIncidence: {
        const Season s = resolve_season(series, target.season);
        double peak = series.value(s.first);
        for (long t = s.first + 1; t <= s.last; ++t) peak = std::max(peak, series.value(t));
        return peak;
    }
    case Target::Kind::PeakTiming: {
        const Season s = resolve_season(series, target.season);
        double peak = series.value(s.first);
        for (long t = s.first + 1; t <= s.last; ++t) peak = std::max(peak, series.value(t));
        std::vector<long> ties;
        for (long t = s.first; t <= s.last; ++t) {
            if (series.value(t) == peak) ties.push_back(t);
        }
        return ties;
    }
    }
    throw ArgumentError("unknown target kind");
}

TimeSeries train_view(const TimeSeries& series, long through_t) {
    if (through_t < 1 || through_t > series.length()) {
        throw RangeError(index_range_message(through_t, series.length()));
    }
    const std::size_t n = static_cast<std::size_t>(through_t);
    std::vector<double> head(series.values_.begin(), series.values_.begin() + n);
    std::map<std::string, std::vector<double>> covs;
    for (const auto& [name, column] : series.covariates_) {
        covs.emplace(name, std::vector<double>(column.begin(), column.begin() + n));
    }
    std::vector<Season> seasons;
    for (const auto& s : series.seasons_) {
        if (s.last <= through_t) seasons.push_back(s);
    }
    TimeSeries view(series.location_id_, series.t0_, std::move(head), series.cycle_length_,
                    std::move(covs), std::move(seasons));
    view.audit_ = series.audit_;
    view.audit_offset_ = series.audit_offset_;
    return view;
}

long season_index(const TimeSeries& series, long t) {
    if (t < 1) throw RangeError("season_index requires t >= 1");
    const long L = series.cycle_length();
    long r = (series.t0() + t - 2) % L;
    if (r < 0) r += L;
    return r + 1;
}

} // namespace epifor
