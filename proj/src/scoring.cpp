#include "epifor/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "epifor/common.hpp"
#include "epifor/errors.hpp"

namespace epifor {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        std::ostringstream out;
        out << what << ": " << a << " forecasts vs " << b << " truths";
        throw ArgumentError(out.str());
    }
    if (a == 0) throw ArgumentError(std::string(what) + ": empty input");
}

// Integral of (c0 + (c1 - c0) * s)^2 ds for s in [0, 1], times width.
double squared_segment(double c0, double c1, double width) {
    if (c0 == c1) return width * c0 * c0;
    return width * (c1 * c1 * c1 - c0 * c0 * c0) / (3.0 * (c1 - c0));
}

} // namespace

ScoreReport make_report(std::string model_id, std::string metric,
                        std::vector<std::pair<std::string, double>> per_case) {
    ScoreReport report;
    report.model_id = std::move(model_id);
    report.metric = std::move(metric);
    report.n = per_case.size();
    double sum = 0.0;
    for (const auto& [desc, score] : per_case) sum += score;
    report.aggregate = per_case.empty() ? 0.0 : sum / static_cast<double>(per_case.size());
    report.per_case = std::move(per_case);
    return report;
}

double mae(const std::vector<PointForecast>& points, const std::vector<double>& truths) {
    require_same_size(points.size(), truths.size(), "mae");
    double sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        sum += std::abs(truths[i] - points[i].value);
    }
    return sum / static_cast<double>(points.size());
}

double rmae(const std::vector<double>& abs_errors_model,
            const std::vector<double>& abs_errors_reference) {
    require_same_size(abs_errors_model.size(), abs_errors_reference.size(), "rmae");
    double num = 0.0;
    double den = 0.0;
    for (double e : abs_errors_model) num += std::abs(e);
    for (double e : abs_errors_reference) den += std::abs(e);
    if (den <= 0.0) throw DegenerateError("rmae: reference errors sum to zero");
    return num / den;
}

double coverage_rate(const std::vector<IntervalForecast>& intervals,
                     const std::vector<double>& truths) {
    require_same_size(intervals.size(), truths.size(), "coverage_rate");
    const double alpha = intervals.front().alpha;
    std::size_t covered = 0;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        if (intervals[i].alpha != alpha) {
            throw ArgumentError("coverage_rate: intervals mix different alpha levels");
        }
        if (intervals[i].lower <= truths[i] && truths[i] <= intervals[i].upper) ++covered;
    }
    return static_cast<double>(covered) / static_cast<double>(intervals.size());
}

double interval_score(const std::vector<IntervalForecast>& intervals,
                      const std::vector<double>& truths) {
    require_same_size(intervals.size(), truths.size(), "interval_score");
    const double alpha = intervals.front().alpha;
    double sum = 0.0;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const auto& iv = intervals[i];
        if (iv.alpha != alpha) {
            throw ArgumentError("interval_score: intervals mix different alpha levels");
        }
        const double z = truths[i];
        double s = iv.upper - iv.lower;
        if (z < iv.lower) s += (2.0 / iv.alpha) * (iv.lower - z);
        if (z > iv.upper) s += (2.0 / iv.alpha) * (z - iv.upper);
        sum += s;
    }
    return sum / static_cast<double>(intervals.size());
}

double log_score_single(const BinnedForecast& forecast, double truth, double floor) {
    const long idx = bin_index(forecast, truth);
    if (idx < 0) return floor;
    const double mass = forecast.probs[static_cast<std::size_t>(idx)];
    if (mass <= 0.0) return floor;
    return std::max(std::log(mass), floor);
}

double log_score(const std::vector<BinnedForecast>& forecasts, const std::vector<double>& truths,
                 double floor) {
    require_same_size(forecasts.size(), truths.size(), "log_score");
    double sum = 0.0;
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        sum += log_score_single(forecasts[i], truths[i], floor);
    }
    return sum / static_cast<double>(forecasts.size());
}

double crps(const BinnedForecast& forecast, double truth) {
    const auto valid = validate(forecast);
    if (!valid.ok()) throw ArgumentError("crps: invalid forecast: " + valid.violations.front());
    // Integrate (F - H)^2 over a domain wide enough to include the truth;
    // outside the bins F is constant 0 or 1.
    double total = 0.0;
    if (truth < forecast.edges.front()) total += forecast.edges.front() - truth;
    if (truth > forecast.edges.back()) total += truth - forecast.edges.back();
    double cum = 0.0;
    for (std::size_t i = 0; i < forecast.probs.size(); ++i) {
        const double lo = forecast.edges[i];
        const double hi = forecast.edges[i + 1];
        const double f_lo = cum;
        const double f_hi = cum + forecast.probs[i];
        const double width = hi - lo;
        auto f_at = [&](double x) { return f_lo + (f_hi - f_lo) * (x - lo) / width; };
        if (truth <= lo) {
            total += squared_segment(f_lo - 1.0, f_hi - 1.0, width);
        } else if (truth >= hi) {
            total += squared_segment(f_lo, f_hi, width);
        } else {
            const double f_z = f_at(truth);
            total += squared_segment(f_lo, f_z, truth - lo);
            total += squared_segment(f_z - 1.0, f_hi - 1.0, hi - truth);
        }
        cum = f_hi;
    }
    return total;
}

double crps(const SampleForecast& forecast, double truth) {
    const auto valid = validate(forecast);
    if (!valid.ok()) throw ArgumentError("crps: invalid forecast: " + valid.violations.front());
    const auto& xs = forecast.samples;
    const double n = static_cast<double>(xs.size());
    double mean_abs = 0.0;
    for (double x : xs) mean_abs += std::abs(x - truth);
    mean_abs /= n;
    // Mean pairwise distance over all ordered pairs, via the sorted-prefix
    // identity to stay O(n log n).
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    double pair_sum = 0.0;
    double prefix = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        pair_sum += static_cast<double>(i) * sorted[i] - prefix;
        prefix += sorted[i];
    }
    const double mean_pair = 2.0 * pair_sum / (n * n);
    return mean_abs - 0.5 * mean_pair;
}

double crps(const PointForecast& forecast, double truth) {
    return std::abs(forecast.value - truth);
}

double crps(const ForecastRepr& repr, double truth) {
    if (const auto* b = std::get_if<BinnedForecast>(&repr)) return crps(*b, truth);
    if (const auto* s = std::get_if<SampleForecast>(&repr)) return crps(*s, truth);
    if (const auto* p = std::get_if<PointForecast>(&repr)) return crps(*p, truth);
    throw ArgumentError("crps: interval forecasts carry no full distribution");
}

double crps_skill(double crps_model, double mae_reference) {
    if (!(mae_reference > 0.0)) throw DegenerateError("crps_skill: reference MAE is zero");
    return crps_model / mae_reference;
}

DMResult dm_test(const std::vector<double>& loss_a, const std::vector<double>& loss_b,
                 long horizon) {
    require_same_size(loss_a.size(), loss_b.size(), "dm_test");
    if (loss_a.size() < 4) throw ArgumentError("dm_test: needs at least 4 loss pairs");
    if (horizon < 1) throw ArgumentError("dm_test: horizon must be >= 1");
    const std::size_t t_len = loss_a.size();
    std::vector<double> d(t_len);
    bool identical = true;
    for (std::size_t i = 0; i < t_len; ++i) {
        if (!std::isfinite(loss_a[i]) || !std::isfinite(loss_b[i])) {
            throw ArgumentError("dm_test: non-finite loss");
        }
        d[i] = loss_a[i] - loss_b[i];
        if (d[i] != 0.0) identical = false;
    }
    if (identical) throw DegenerateError("dm_test: loss series are identical");
    const double t_real = static_cast<double>(t_len);
    const double d_bar = stats::mean(d);
    auto autocov = [&](std::size_t k) {
        double sum = 0.0;
        for (std::size_t i = k; i < t_len; ++i) {
            sum += (d[i] - d_bar) * (d[i - k] - d_bar);
        }
        return sum / t_real;
    };
    double lrv = autocov(0);
    for (std::size_t k = 1; k < static_cast<std::size_t>(horizon) && k < t_len; ++k) {
        lrv += 2.0 * autocov(k);
    }
    if (lrv <= 0.0) {
        throw DegenerateError("dm_test: long-run variance is not positive");
    }
    double statistic = d_bar / std::sqrt(lrv / t_real);
    const double h = static_cast<double>(horizon);
    const double correction = (t_real + 1.0 - 2.0 * h + h * (h - 1.0) / t_real) / t_real;
    statistic *= std::sqrt(correction);
    const double p = 2.0 * (1.0 - stats::normal_cdf(std::abs(statistic)));
    return {statistic, p};
}

} // namespace epifor
