#pragma once

#include <string>
#include <variant>
#include <vector>

#include "epifor/time_series.hpp"

namespace epifor {

/// Single-value forecast.
struct PointForecast {
    double value = 0.0;
};

/// Central (1 - alpha) * 100% prediction interval.
struct IntervalForecast {
    double alpha = 0.05;
    double lower = 0.0;
    double upper = 0.0;
};

/// Predictive density as probabilities over contiguous bins. Mass is uniform
/// within a bin, so the CDF is piecewise linear.
struct BinnedForecast {
    std::vector<double> edges; // B + 1 strictly increasing edges
    std::vector<double> probs; // B non-negative masses summing to 1
};

/// Predictive density as draws from the forecast distribution.
struct SampleForecast {
    std::vector<double> samples;
};

using ForecastRepr = std::variant<PointForecast, IntervalForecast, BinnedForecast, SampleForecast>;

/// One forecast document: a representation bound to a location and target.
struct Forecast {
    std::string location;
    long origin_t = 0;
    Target target;
    ForecastRepr repr;
};

enum class PointLoss { Squared, Absolute };

struct ValidationResult {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Check density invariants. With require_nonnegative_support, flags any
/// support below zero (incidence forecasts must not allow negative values).
ValidationResult validate(const BinnedForecast& density, bool require_nonnegative_support = false);
ValidationResult validate(const SampleForecast& density, bool require_nonnegative_support = false);

/// Forecast CDF at z. Piecewise linear for binned densities; the fraction of
/// samples <= z for sample densities.
double cdf_at(const BinnedForecast& density, double z);
double cdf_at(const SampleForecast& density, double z);

/// Inverse CDF. Binned densities invert the piecewise-linear CDF; sample
/// densities use the inverse empirical CDF (order statistic at ceil(n*p)).
double quantile(const BinnedForecast& density, double p);
double quantile(const SampleForecast& density, double p);

/// Optimal point summary: mean under squared loss, median under absolute
/// loss. The sample median of an even count is the midpoint of the two
/// central order statistics.
PointForecast point_from_density(const BinnedForecast& density, PointLoss loss);
PointForecast point_from_density(const SampleForecast& density, PointLoss loss);

/// Equal-tailed interval with endpoints at quantiles alpha/2 and 1 - alpha/2.
IntervalForecast interval_from_density(const BinnedForecast& density, double alpha);
IntervalForecast interval_from_density(const SampleForecast& density, double alpha);

/// Mean of a binned density (bin midpoints weighted by mass).
double density_mean(const BinnedForecast& density);

/// Index of the bin containing z under the half-open convention
/// [lo, hi), last bin closed; -1 when z lies outside the support.
long bin_index(const BinnedForecast& density, double z);

} // namespace epifor
