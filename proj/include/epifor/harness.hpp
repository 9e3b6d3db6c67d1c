#pragma once

#include <map>
#include <string>
#include <vector>

#include "epifor/models.hpp"
#include "epifor/scoring.hpp"
#include "epifor/time_series.hpp"

namespace epifor {

/// Chronological split: held-back seasons used for cross-validated model
/// selection, then later seasons for prospective testing.
struct SplitSpec {
    std::vector<Season> training_seasons;
    std::vector<Season> testing_seasons;
};

void validate_split(const SplitSpec& split);

/// Error scale for point-forecast evaluation. Log1p scores
/// |log(y+1) - log(yhat+1)|, which keeps folds comparable across
/// magnitudes and tolerates zero incidence.
enum class ErrorScale { Log1p, Natural };

double scaled_abs_error(double truth, double predicted, ErrorScale scale);

struct CVResult {
    std::string model_id;
    long size = 0;
    std::vector<std::pair<std::string, double>> fold_scores; // (season label, error)
    double cv_error = 0.0;
    double cv_se = 0.0;
    std::vector<std::string> failed_folds;
};

/// One cross-validation case: a density forecast of a held-out step plus
/// its realized value. Ordering is fold -> location -> step, identical for
/// every model, so cases align across models for ensemble training.
struct CVCase {
    std::string season_label;
    std::string location;
    Target target;
    long t = 0; // absolute index of the forecast value
    BinnedForecast density;
    double truth = 0.0;
};

struct CVForecasts {
    std::vector<CVCase> cases;
    std::vector<std::string> failed_folds;
};

/// Training series for one held-out season: every other training season
/// spliced chronologically, with t0 shifted so the forecast continuation
/// lands on the held-out season's cycle phase. Season ranges should cover
/// whole cycles; partial cycles would misalign the spliced interior.
TimeSeries splice_training(const TimeSeries& series, const std::vector<Season>& keep,
                           long heldout_first);

/// Leave-one-season-out forecasts: each training season is forecast from a
/// model fit on all the other training seasons.
CVForecasts loyo_forecasts(const ForecasterSpec& spec, const std::vector<TimeSeries>& data,
                           const SplitSpec& split);

/// Cross-validation error of one model under the leave-one-season-out
/// protocol: per-fold mean absolute error of median point forecasts on the
/// chosen scale, averaged over locations.
CVResult loyo_cv(const ForecasterSpec& spec, const std::vector<TimeSeries>& data,
                 const SplitSpec& split, ErrorScale scale = ErrorScale::Log1p);

/// Strictly chronological alternative: each training season after the first
/// is forecast from the seasons before it.
CVResult prospective_cv(const ForecasterSpec& spec, const std::vector<TimeSeries>& data,
                        const SplitSpec& split, ErrorScale scale = ErrorScale::Log1p);

/// Width of the parsimony band around the minimum CV error.
enum class SelectionBand { StandardError, StandardDeviation };

struct Selection {
    std::string best;
    std::string parsimonious;
};

/// Best = smallest CV error (ties: smaller size, then id). Parsimonious =
/// smallest model whose CV error is within one band of the best.
Selection select_models(const std::vector<CVResult>& results,
                        SelectionBand band = SelectionBand::StandardError);

/// One prospective test case from the rolling-origin protocol.
struct TestCase {
    std::string model_id;
    std::string season_label;
    std::string location;
    Target target;
    long t = 0;
    BinnedForecast density;
    double truth = 0.0;
};

struct RollingOutcome {
    std::vector<TestCase> cases; // season -> model -> location -> step
    /// Largest time index read while fitting/forecasting each season,
    /// per season label; proves forecasts never saw their target season.
    std::map<std::string, long> audit_max;
    bool audit_clean = true;
    std::vector<std::string> failures; // "model@season: reason"
};

/// Rolling-origin recalibration: each testing season in order is forecast
/// by models fit on all data strictly before it, then absorbed into the
/// training window. Data access is audited through instrumented series.
RollingOutcome rolling_origin_test(const std::vector<ForecasterSpec>& specs,
                                   const std::vector<TimeSeries>& data, const SplitSpec& split);

/// Scoring views over test cases for one model.
ScoreReport score_cases_abs_error(const std::vector<TestCase>& cases, const std::string& model_id,
                                  ErrorScale scale);
ScoreReport score_cases_log(const std::vector<TestCase>& cases, const std::string& model_id);
ScoreReport score_cases_crps(const std::vector<TestCase>& cases, const std::string& model_id);

/// Relative MAE of each model against a reference model over paired cases.
std::map<std::string, double> rmae_by_model(const std::vector<TestCase>& cases,
                                            const std::string& reference_id);

struct TrainingErrorRow {
    std::string model_id;
    long size = 0;
    double training_error = 0.0; // RMSE on the chosen scale over common rows
};

/// In-sample error of each model fit on data through through_t. All
/// seasonal_ar specs are refit over a shared row window so nested models
/// stay comparable (larger lag orders never see fewer rows).
std::vector<TrainingErrorRow> training_error(const std::vector<ForecasterSpec>& specs,
                                             const std::vector<TimeSeries>& data, long through_t,
                                             ErrorScale scale = ErrorScale::Log1p);

} // namespace epifor
