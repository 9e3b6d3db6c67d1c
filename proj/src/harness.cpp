#include "epifor/harness.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <sstream>

#include "epifor/common.hpp"
#include "epifor/errors.hpp"

namespace epifor {

namespace {

std::vector<Season> sorted_by_start(std::vector<Season> seasons) {
    std::sort(seasons.begin(), seasons.end(),
              [](const Season& a, const Season& b) { return a.first < b.first; });
    return seasons;
}

std::vector<Target> season_step_targets(long origin, long length) {
    std::vector<Target> targets;
    targets.reserve(static_cast<std::size_t>(length));
    for (long k = 1; k <= length; ++k) targets.push_back(Target::step_ahead(origin, k));
    return targets;
}

double median_point(const BinnedForecast& density) {
    return point_from_density(density, PointLoss::Absolute).value;
}

struct FoldStats {
    // Per-location sums for one fold; pooled as an unweighted mean of
    // location means.
    std::vector<double> location_means;
    double fold_score() const { return stats::mean(location_means); }
};

CVResult summarize_cv(const std::string& model_id, long size,
                      std::vector<std::pair<std::string, double>> fold_scores,
                      std::vector<std::string> failed_folds) {
    if (fold_scores.empty()) {
        throw TrainingError("cross-validation failed in every fold for model " + model_id);
    }
    CVResult result;
    result.model_id = model_id;
    result.size = size;
    result.fold_scores = std::move(fold_scores);
    result.failed_folds = std::move(failed_folds);
    std::vector<double> scores;
    scores.reserve(result.fold_scores.size());
    for (const auto& [label, score] : result.fold_scores) scores.push_back(score);
    result.cv_error = stats::mean(scores);
    result.cv_se = scores.size() > 1
                       ? stats::stddev(scores) / std::sqrt(static_cast<double>(scores.size()))
                       : 0.0;
    return result;
}

CVResult cv_from_cases(const ForecasterSpec& spec, const CVForecasts& forecasts,
                       const std::vector<Season>& folds, ErrorScale scale) {
    std::vector<std::pair<std::string, double>> fold_scores;
    for (const auto& season : folds) {
        std::map<std::string, std::pair<double, long>> by_location; // sum, count
        for (const auto& c : forecasts.cases) {
            if (c.season_label != season.label) continue;
            auto& [sum, count] = by_location[c.location];
            sum += scaled_abs_error(c.truth, median_point(c.density), scale);
            ++count;
        }
        if (by_location.empty()) continue; // failed fold
        std::vector<double> location_means;
        location_means.reserve(by_location.size());
        for (const auto& [loc, agg] : by_location) {
            location_means.push_back(agg.first / static_cast<double>(agg.second));
        }
        fold_scores.emplace_back(season.label, stats::mean(location_means));
    }
    return summarize_cv(spec.model_id(), model_size(spec), std::move(fold_scores),
                        forecasts.failed_folds);
}

} // namespace

void validate_split(const SplitSpec& split) {
    if (split.training_seasons.empty()) {
        throw ArgumentError("split needs at least one training season");
    }
    std::vector<std::pair<long, long>> ranges;
    long training_last = 0;
    for (const auto& s : split.training_seasons) {
        if (!s.resolved()) throw ArgumentError("training season '" + s.label + "' is unresolved");
        ranges.emplace_back(s.first, s.last);
        training_last = std::max(training_last, s.last);
    }
    for (const auto& s : split.testing_seasons) {
        if (!s.resolved()) throw ArgumentError("testing season '" + s.label + "' is unresolved");
        if (s.first <= training_last) {
            throw ArgumentError("testing season '" + s.label +
                                "' does not lie strictly after the training seasons");
        }
        ranges.emplace_back(s.first, s.last);
    }
    std::sort(ranges.begin(), ranges.end());
    for (std::size_t i = 1; i < ranges.size(); ++i) {
        if (ranges[i].first <= ranges[i - 1].second) {
            throw ArgumentError("split seasons overlap");
        }
    }
}

double scaled_abs_error(double truth, double predicted, ErrorScale scale) {
    if (scale == ErrorScale::Natural) return std::abs(truth - predicted);
    return std::abs(std::log1p(std::max(0.0, truth)) - std::log1p(std::max(0.0, predicted)));
}

TimeSeries splice_training(const TimeSeries& series, const std::vector<Season>& keep,
                           long heldout_first) {
    if (keep.empty()) throw ArgumentError("splice_training needs at least one season to keep");
    const auto ordered = sorted_by_start(keep);
    std::vector<double> values;
    std::map<std::string, std::vector<double>> covariates;
    for (const auto& [name, column] : series.covariates()) covariates[name] = {};
    for (const auto& s : ordered) {
        if (s.first < 1 || s.last > series.length()) {
            throw RangeError("season '" + s.label + "' outside series");
        }
        for (long t = s.first; t <= s.last; ++t) values.push_back(series.value(t));
        for (const auto& [name, column] : series.covariates()) {
            for (long t = s.first; t <= s.last; ++t) {
                covariates[name].push_back(column[static_cast<std::size_t>(t - 1)]);
            }
        }
    }
    const long spliced_len = static_cast<long>(values.size());
    // Choose t0 so that season_index(spliced, T'+k) equals
    // season_index(original, heldout_first + k - 1): the forecast
    // continuation starts on the held-out season's phase.
    const long t0 = series.t0() + heldout_first - 1 - spliced_len;
    return TimeSeries(series.location(), t0, std::move(values), series.cycle_length(),
                      std::move(covariates));
}

CVForecasts loyo_forecasts(const ForecasterSpec& spec, const std::vector<TimeSeries>& data,
                           const SplitSpec& split) {
    validate_split(split);
    if (split.training_seasons.size() < 2) {
        throw ArgumentError("leave-one-season-out needs at least 2 training seasons");
    }
    if (data.empty()) throw ArgumentError("no series to cross-validate on");
    const auto folds = sorted_by_start(split.training_seasons);
    CVForecasts out;
    for (std::size_t held = 0; held < folds.size(); ++held) {
        const Season& heldout = folds[held];
        std::vector<Season> keep;
        for (std::size_t j = 0; j < folds.size(); ++j) {
            if (j != held) keep.push_back(folds[j]);
        }
        std::vector<CVCase> fold_cases;
        try {
            for (const auto& series : data) {
                const TimeSeries train = splice_training(series, keep, heldout.first);
                const FitResult fitres = fit(spec, train);
                const auto targets = season_step_targets(train.length(), heldout.length());
                const auto forecasts = forecast(spec, fitres, train, targets);
                for (std::size_t i = 0; i < forecasts.size(); ++i) {
                    CVCase c;
                    c.season_label = heldout.label;
                    c.location = series.location();
                    c.target = forecasts[i].target;
                    c.t = heldout.first + static_cast<long>(i);
                    c.density = std::get<BinnedForecast>(forecasts[i].repr);
                    c.truth = series.value(c.t);
                    fold_cases.push_back(std::move(c));
                }
            }
        } catch (const std::exception& e) {
            out.failed_folds.push_back(heldout.label + ": " + e.what());
            continue;
        }
        for (auto& c : fold_cases) out.cases.push_back(std::move(c));
    }
    return out;
}

CVResult loyo_cv(const ForecasterSpec& spec, const std::vector<TimeSeries>& data,
                 const SplitSpec& split, ErrorScale scale) {
    const CVForecasts forecasts = loyo_forecasts(spec, data, split);
    return cv_from_cases(spec, forecasts, sorted_by_start(split.training_seasons), scale);
}

CVResult prospective_cv(const ForecasterSpec& spec, const std::vector<TimeSeries>& data,
                        const SplitSpec& split, ErrorScale scale) {
    validate_split(split);
    if (split.training_seasons.size() < 2) {
        throw ArgumentError("prospective cross-validation needs at least 2 training seasons");
    }
    if (data.empty()) throw ArgumentError("no series to cross-validate on");
    const auto folds = sorted_by_start(split.training_seasons);
    CVForecasts out;
    for (std::size_t held = 1; held < folds.size(); ++held) {
        const Season& heldout = folds[held];
        std::vector<CVCase> fold_cases;
        try {
            for (const auto& series : data) {
                const TimeSeries train = train_view(series, heldout.first - 1);
                const FitResult fitres = fit(spec, train);
                const auto targets = season_step_targets(train.length(), heldout.length());
                const auto forecasts = forecast(spec, fitres, train, targets);
                for (std::size_t i = 0; i < forecasts.size(); ++i) {
                    CVCase c;
                    c.season_label = heldout.label;
                    c.location = series.location();
                    c.target = forecasts[i].target;
                    c.t = heldout.first + static_cast<long>(i);
                    c.density = std::get<BinnedForecast>(forecasts[i].repr);
                    c.truth = series.value(c.t);
                    fold_cases.push_back(std::move(c));
                }
            }
        } catch (const std::exception& e) {
            out.failed_folds.push_back(heldout.label + ": " + e.what());
            continue;
        }
        for (auto& c : fold_cases) out.cases.push_back(std::move(c));
    }
    std::vector<Season> scored(folds.begin() + 1, folds.end());
    return cv_from_cases(spec, out, scored, scale);
}

Selection select_models(const std::vector<CVResult>& results, SelectionBand band) {
    if (results.empty()) throw ArgumentError("select_models needs at least one result");
    auto better_best = [](const CVResult& a, const CVResult& b) {
        if (a.cv_error != b.cv_error) return a.cv_error < b.cv_error;
        if (a.size != b.size) return a.size < b.size;
        return a.model_id < b.model_id;
    };
    const CVResult* best = &results.front();
    for (const auto& r : results) {
        if (better_best(r, *best)) best = &r;
    }
    double width = best->cv_se;
    if (band == SelectionBand::StandardDeviation) {
        width *= std::sqrt(static_cast<double>(best->fold_scores.size()));
    }
    const double cutoff = best->cv_error + width;
    auto better_parsimonious = [](const CVResult& a, const CVResult& b) {
        if (a.size != b.size) return a.size < b.size;
        if (a.cv_error != b.cv_error) return a.cv_error < b.cv_error;
        return a.model_id < b.model_id;
    };
    const CVResult* parsimonious = best;
    for (const auto& r : results) {
        if (r.cv_error <= cutoff && better_parsimonious(r, *parsimonious)) parsimonious = &r;
    }
    return {best->model_id, parsimonious->model_id};
}

RollingOutcome rolling_origin_test(const std::vector<ForecasterSpec>& specs,
                                   const std::vector<TimeSeries>& data, const SplitSpec& split) {
    validate_split(split);
    if (split.testing_seasons.empty()) {
        throw ArgumentError("rolling-origin testing needs at least one testing season");
    }
    if (data.empty()) throw ArgumentError("no series to test on");
    const auto seasons = sorted_by_start(split.testing_seasons);
    std::vector<TimeSeries> roots = data; // local copies carry the audit
    RollingOutcome out;
    for (const auto& season : seasons) {
        auto audit = std::make_shared<AccessAudit>();
        for (auto& root : roots) root.set_audit(audit);
        for (const auto& spec : specs) {
            std::vector<TestCase> season_cases;
            try {
                for (std::size_t loc = 0; loc < roots.size(); ++loc) {
                    const TimeSeries train = train_view(roots[loc], season.first - 1);
                    const FitResult fitres = fit(spec, train);
                    const auto targets = season_step_targets(train.length(), season.length());
                    const auto forecasts = forecast(spec, fitres, train, targets);
                    for (std::size_t i = 0; i < forecasts.size(); ++i) {
                        TestCase c;
                        c.model_id = spec.model_id();
                        c.season_label = season.label;
                        c.location = data[loc].location();
                        c.target = forecasts[i].target;
                        c.t = season.first + static_cast<long>(i);
                        c.density = std::get<BinnedForecast>(forecasts[i].repr);
                        c.truth = data[loc].value(c.t);
                        season_cases.push_back(std::move(c));
                    }
                }
            } catch (const std::exception& e) {
                out.failures.push_back(spec.model_id() + "@" + season.label + ": " + e.what());
                continue;
            }
            for (auto& c : season_cases) out.cases.push_back(std::move(c));
        }
        const long seen = audit->max_index.load();
        out.audit_max[season.label] = seen;
        if (seen >= season.first) out.audit_clean = false;
        for (auto& root : roots) root.set_audit(nullptr);
    }
    return out;
}

ScoreReport score_cases_abs_error(const std::vector<TestCase>& cases, const std::string& model_id,
                                  ErrorScale scale) {
    std::vector<std::pair<std::string, double>> per_case;
    for (const auto& c : cases) {
        if (c.model_id != model_id) continue;
        per_case.emplace_back(c.location + "|" + c.target.describe(),
                              scaled_abs_error(c.truth, median_point(c.density), scale));
    }
    return make_report(model_id, scale == ErrorScale::Log1p ? "abs_error_log" : "abs_error",
                       std::move(per_case));
}

ScoreReport score_cases_log(const std::vector<TestCase>& cases, const std::string& model_id) {
    std::vector<std::pair<std::string, double>> per_case;
    for (const auto& c : cases) {
        if (c.model_id != model_id) continue;
        per_case.emplace_back(c.location + "|" + c.target.describe(),
                              log_score_single(c.density, c.truth));
    }
    return make_report(model_id, "log_score", std::move(per_case));
}

ScoreReport score_cases_crps(const std::vector<TestCase>& cases, const std::string& model_id) {
    std::vector<std::pair<std::string, double>> per_case;
    for (const auto& c : cases) {
        if (c.model_id != model_id) continue;
        per_case.emplace_back(c.location + "|" + c.target.describe(), crps(c.density, c.truth));
    }
    return make_report(model_id, "crps", std::move(per_case));
}

std::map<std::string, double> rmae_by_model(const std::vector<TestCase>& cases,
                                            const std::string& reference_id) {
    std::map<std::string, double> reference_errors; // case key -> |error|
    for (const auto& c : cases) {
        if (c.model_id != reference_id) continue;
        reference_errors[c.season_label + "|" + c.location + "|" + std::to_string(c.t)] =
            std::abs(c.truth - median_point(c.density));
    }
    if (reference_errors.empty()) {
        throw ArgumentError("reference model '" + reference_id + "' has no test cases");
    }
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> paired;
    for (const auto& c : cases) {
        const auto key = c.season_label + "|" + c.location + "|" + std::to_string(c.t);
        const auto ref = reference_errors.find(key);
        if (ref == reference_errors.end()) continue;
        auto& [model_errs, ref_errs] = paired[c.model_id];
        model_errs.push_back(std::abs(c.truth - median_point(c.density)));
        ref_errs.push_back(ref->second);
    }
    std::map<std::string, double> out;
    for (const auto& [model, errs] : paired) {
        out[model] = rmae(errs.first, errs.second);
    }
    return out;
}

std::vector<TrainingErrorRow> training_error(const std::vector<ForecasterSpec>& specs,
                                             const std::vector<TimeSeries>& data, long through_t,
                                             ErrorScale scale) {
    if (specs.empty()) throw ArgumentError("training_error needs at least one spec");
    if (data.empty()) throw ArgumentError("training_error needs at least one series");
    long common_first = 1;
    for (const auto& spec : specs) {
        if (spec.family == "seasonal_ar") {
            common_first =
                std::max(common_first, std::lround(spec.hyper("p", 1.0)) + 1);
        }
    }
    std::vector<TrainingErrorRow> rows;
    for (const auto& spec : specs) {
        ForecasterSpec adjusted = spec;
        if (spec.family == "seasonal_ar") {
            adjusted.hyperparameters["first_fit_t"] = static_cast<double>(common_first);
        }
        double sse = 0.0;
        long n = 0;
        for (const auto& series : data) {
            const TimeSeries train = train_view(series, through_t);
            const FitResult fitres = fit(adjusted, train);
            for (const auto& [t, pred] : in_sample_predictions(adjusted, fitres, train)) {
                if (t < common_first) continue;
                const double err = scaled_abs_error(train.value(t), pred, scale);
                sse += err * err;
                ++n;
            }
        }
        TrainingErrorRow row;
        row.model_id = spec.model_id();
        row.size = model_size(spec);
        row.training_error = n > 0 ? std::sqrt(sse / static_cast<double>(n)) : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace epifor
