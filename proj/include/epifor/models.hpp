#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "epifor/forecast.hpp"
#include "epifor/time_series.hpp"

namespace epifor {

/// Configuration of one forecaster: family, hyperparameters, the bin grid
/// its densities are emitted on, and the seed for any stochastic derivation.
struct ForecasterSpec {
    std::string family;
    std::string id;
    std::map<std::string, double> hyperparameters;
    std::vector<double> bin_grid;
    std::uint64_t seed = 0;

    double hyper(const std::string& name, double fallback) const;
    bool has_hyper(const std::string& name) const;
    const std::string& model_id() const { return id.empty() ? family : id; }
};

struct SIRState {
    double S = 0.0;
    double I = 0.0;
    double R = 0.0;
    double N = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

struct FitResult {
    std::map<std::string, double> parameters;
    double training_loss = 0.0;
    double residual_sd = 0.0;
    bool converged = true;
    // Per-season-index historical pools; populated by seasonal_median only.
    std::vector<std::vector<double>> season_pools;
};

/// Fit a forecaster to a training series. Deterministic given (spec, train).
FitResult fit(const ForecasterSpec& spec, const TimeSeries& train);

/// Produce forecasts for the requested targets, conditioning only on the
/// training series. Densities are emitted as BinnedForecast: step-ahead
/// targets through the family's predictive density on spec.bin_grid, event
/// targets (peaks, exceedance) through seeded Monte Carlo trajectory draws.
std::vector<Forecast> forecast(const ForecasterSpec& spec, const FitResult& fit,
                               const TimeSeries& train, const std::vector<Target>& targets);

/// One RK4 step of the SIR dynamics dS=-bSI/N, dI=bSI/N-gI, dR=gI.
SIRState sir_step(const SIRState& state, double dt);

/// Integrate one unit observation interval in `substeps` RK4 steps.
SIRState sir_interval(const SIRState& state, long substeps);

/// Synthetic incidence from SIR dynamics with multiplicative log-normal
/// observation noise; incidence per interval is the drop in susceptibles.
TimeSeries simulate_sir(const SIRState& params, long t_len, double noise_sd, std::uint64_t seed);

/// Expected future incidence for steps 1..horizon past the end of training.
std::vector<double> mean_trajectory(const ForecasterSpec& spec, const FitResult& fit,
                                    const TimeSeries& train, long horizon);

/// Fitted values over the training rows the family can predict, as
/// (time index, prediction) pairs on the natural scale.
std::vector<std::pair<long, double>> in_sample_predictions(const ForecasterSpec& spec,
                                                           const FitResult& fit,
                                                           const TimeSeries& train);

/// Effective parameter count used by parsimony-based model selection.
long model_size(const ForecasterSpec& spec);

/// Number of Monte Carlo trajectory draws behind event-target densities.
inline constexpr long kTrajectoryDraws = 2000;

/// Discretize a Gaussian onto a bin grid, truncating below `truncate_at`
/// and renormalizing. Degenerate sd collapses to a point mass.
BinnedForecast discretize_gaussian(double mu, double sd, const std::vector<double>& edges,
                                   double truncate_at = 0.0);

/// Empirical distribution of values on a bin grid; values outside the grid
/// are clamped into the first/last bin.
BinnedForecast discretize_empirical(const std::vector<double>& values,
                                    const std::vector<double>& edges);

} // namespace epifor
