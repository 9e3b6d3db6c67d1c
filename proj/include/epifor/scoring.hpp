#pragma once

#include <string>
#include <utility>
#include <vector>

#include "epifor/forecast.hpp"

namespace epifor {

/// Per-forecast and aggregated metric values for one model.
struct ScoreReport {
    std::string model_id;
    std::string metric;
    std::vector<std::pair<std::string, double>> per_case;
    double aggregate = 0.0;
    std::size_t n = 0;
};

ScoreReport make_report(std::string model_id, std::string metric,
                        std::vector<std::pair<std::string, double>> per_case);

/// Mean absolute error of point forecasts against realized values.
double mae(const std::vector<PointForecast>& points, const std::vector<double>& truths);

/// Relative MAE: the ratio of summed absolute errors of a model to those of a
/// reference model. Values below 1 favour the model.
double rmae(const std::vector<double>& abs_errors_model,
            const std::vector<double>& abs_errors_reference);

/// Fraction of prediction intervals containing the realized value; endpoint
/// hits count as covered. All intervals must share one alpha.
double coverage_rate(const std::vector<IntervalForecast>& intervals,
                     const std::vector<double>& truths);

/// Mean interval score: width plus 2/alpha-weighted penalties for misses
/// outside the interval. Lower is better.
double interval_score(const std::vector<IntervalForecast>& intervals,
                      const std::vector<double>& truths);

/// Mean natural-log probability mass assigned to the bin containing each
/// realized value, with each term floored so the score stays finite.
double log_score(const std::vector<BinnedForecast>& forecasts, const std::vector<double>& truths,
                 double floor = -10.0);

double log_score_single(const BinnedForecast& forecast, double truth, double floor = -10.0);

/// Continuous ranked probability score: the integral of the squared
/// difference between the forecast CDF and the step function at the truth.
double crps(const BinnedForecast& forecast, double truth);
double crps(const SampleForecast& forecast, double truth);
double crps(const PointForecast& forecast, double truth);
double crps(const ForecastRepr& repr, double truth);

/// Scale-free skill: model CRPS divided by the MAE of a reference point
/// forecaster on the same cases.
double crps_skill(double crps_model, double mae_reference);

struct DMResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Diebold-Mariano comparison of two loss series from h-step-ahead
/// forecasts, with the Harvey-Leybourne-Newbold small-sample correction and
/// a two-sided normal p-value.
DMResult dm_test(const std::vector<double>& loss_a, const std::vector<double>& loss_b,
                 long horizon);

} // namespace epifor
