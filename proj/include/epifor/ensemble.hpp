#pragma once

#include <string>
#include <vector>

#include "epifor/forecast.hpp"

namespace epifor {

/// A linear pool over named component forecasters.
struct EnsembleSpec {
    std::vector<std::string> component_ids;
    std::vector<double> weights;
};

void validate_weights(const std::vector<double>& weights, std::size_t expected);

/// Weighted mixture of binned forecasts sharing one edge vector.
BinnedForecast combine(const std::vector<BinnedForecast>& forecasts,
                       const std::vector<double>& weights);

struct WeightTraining {
    std::vector<double> weights;
    bool degenerate = false;
    long iterations = 0;
    /// Mean floored log score of the mixture after each EM iteration;
    /// non-decreasing by construction.
    std::vector<double> objective_path;
};

/// Expectation-maximization for mixture weights that maximize the mean
/// floored log score of the pooled forecast over scored cases. Component
/// truth-bin masses are floored at e^floor so the objective stays finite.
/// cases_by_component[i] holds one forecast per component for case i.
WeightTraining train_weights(const std::vector<std::vector<BinnedForecast>>& cases_by_component,
                             const std::vector<double>& truths, double floor = -10.0);

} // namespace epifor
