#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "epifor/errors.hpp"

namespace epifor {

/// Records the largest time index read through any series view that carries
/// it. Used by the harness to prove that prospective forecasts never touched
/// data at or after their target season.
struct AccessAudit {
    std::atomic<long> max_index{0};
    void record(long t) {
        long cur = max_index.load(std::memory_order_relaxed);
        while (t > cur && !max_index.compare_exchange_weak(cur, t, std::memory_order_relaxed)) {
        }
    }
};

/// A contiguous, inclusive block of 1-based time indices with a label.
/// A Season with first == 0 is label-only and must be resolved against a
/// series before use.
struct Season {
    std::string label;
    long first = 0;
    long last = 0;

    bool resolved() const { return first >= 1 && last >= first; }
    long length() const { return resolved() ? last - first + 1 : 0; }
};

/// Regularly spaced incidence observations for one location.
///
/// Indices are 1-based: values()[0] is y_1. t0 anchors the seasonal phase of
/// index 1, so prefixes and vintages of the same series agree on
/// season_index().
class TimeSeries {
public:
    TimeSeries(std::string location_id, long t0, std::vector<double> values, long cycle_length,
               std::map<std::string, std::vector<double>> covariates = {},
               std::vector<Season> seasons = {});

    const std::string& location() const { return location_id_; }
    long t0() const { return t0_; }
    long cycle_length() const { return cycle_length_; }
    long length() const { return static_cast<long>(values_.size()); }

    /// y_t for t in [1, T].
    double value(long t) const;

    /// Whole-vector access; reported to the audit as a read of index T.
    const std::vector<double>& values() const;

    const std::map<std::string, std::vector<double>>& covariates() const { return covariates_; }
    const std::vector<Season>& seasons() const { return seasons_; }

    /// Season metadata for a label; throws LookupError if absent.
    const Season& season(const std::string& label) const;

    /// Attach (or clear) an access audit shared with every view derived from
    /// this series. Views report indices in this series' coordinates.
    void set_audit(std::shared_ptr<AccessAudit> audit) { audit_ = std::move(audit); }
    const std::shared_ptr<AccessAudit>& audit() const { return audit_; }

private:
    std::string location_id_;
    long t0_;
    std::vector<double> values_;
    long cycle_length_;
    std::map<std::string, std::vector<double>> covariates_;
    std::vector<Season> seasons_;
    std::shared_ptr<AccessAudit> audit_;
    long audit_offset_ = 0; // local index + offset = audited (root) index

    friend TimeSeries train_view(const TimeSeries& series, long through_t);
};

/// A forecastable quantity positioned relative to an origin time.
struct Target {
    enum class Kind { StepAhead, PeakIncidence, PeakTiming, ThresholdExceedance };

    Kind kind = Kind::StepAhead;
    long origin_t = 0;      // StepAhead / ThresholdExceedance
    long k = 0;             // step offset, may be negative
    double threshold = 0.0; // ThresholdExceedance
    Season season;          // PeakIncidence / PeakTiming

    static Target step_ahead(long origin_t, long k);
    static Target peak_incidence(Season season);
    static Target peak_timing(Season season);
    static Target threshold_exceedance(long origin_t, long k, double threshold);

    /// Compact human-readable descriptor, used in score reports.
    std::string describe() const;
};

/// Realized value of a target: a real, a set of tied peak indices, or a bool.
using Realized = std::variant<double, std::vector<long>, bool>;

/// Evaluate a target against observed data.
Realized realized_target(const TimeSeries& series, const Target& target);

/// Prefix of the series through index through_t, sharing metadata.
TimeSeries train_view(const TimeSeries& series, long through_t);

/// Position of index t within the seasonal cycle: ((t0 + t - 2) mod L) + 1.
long season_index(const TimeSeries& series, long t);

} // namespace epifor
