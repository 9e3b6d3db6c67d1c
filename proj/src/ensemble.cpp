#include "epifor/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "epifor/errors.hpp"
#include "epifor/scoring.hpp"

namespace epifor {

namespace {

constexpr double kWeightTolerance = 1e-8;
constexpr long kMaxIterations = 500;

} // namespace

void validate_weights(const std::vector<double>& weights, std::size_t expected) {
    if (weights.size() != expected) {
        throw ArgumentError("weight count does not match component count");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw ArgumentError("weights must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ArgumentError("weights must sum to 1");
}

BinnedForecast combine(const std::vector<BinnedForecast>& forecasts,
                       const std::vector<double>& weights) {
    if (forecasts.empty()) throw ArgumentError("combine needs at least one forecast");
    validate_weights(weights, forecasts.size());
    const auto& edges = forecasts.front().edges;
    for (const auto& f : forecasts) {
        if (f.edges != edges) throw GridError("combine requires identical bin edges");
    }
    BinnedForecast out;
    out.edges = edges;
    out.probs.assign(edges.size() - 1, 0.0);
    for (std::size_t c = 0; c < forecasts.size(); ++c) {
        for (std::size_t b = 0; b < out.probs.size(); ++b) {
            out.probs[b] += weights[c] * forecasts[c].probs[b];
        }
    }
    return out;
}

WeightTraining train_weights(const std::vector<std::vector<BinnedForecast>>& cases_by_component,
                             const std::vector<double>& truths, double floor) {
    if (cases_by_component.size() != truths.size()) {
        throw ArgumentError("train_weights: case count does not match truth count");
    }
    if (cases_by_component.empty()) throw ArgumentError("train_weights needs at least one case");
    const std::size_t components = cases_by_component.front().size();
    if (components < 2) throw ArgumentError("train_weights needs at least two components");

    // Floored truth-bin masses per (case, component).
    const double mass_floor = std::exp(floor);
    std::vector<std::vector<double>> masses(truths.size(), std::vector<double>(components));
    bool degenerate = true;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (cases_by_component[i].size() != components) {
            throw ArgumentError("train_weights: ragged component lists across cases");
        }
        for (std::size_t c = 0; c < components; ++c) {
            masses[i][c] =
                std::max(std::exp(log_score_single(cases_by_component[i][c], truths[i], floor)),
                         mass_floor);
            if (masses[i][c] != masses[i][0]) degenerate = false;
        }
    }

    WeightTraining result;
    result.weights.assign(components, 1.0 / static_cast<double>(components));
    if (degenerate) {
        result.degenerate = true;
        return result;
    }

    auto objective = [&](const std::vector<double>& w) {
        double total = 0.0;
        for (std::size_t i = 0; i < truths.size(); ++i) {
            double mix = 0.0;
            for (std::size_t c = 0; c < components; ++c) mix += w[c] * masses[i][c];
            total += std::max(std::log(mix), floor);
        }
        return total / static_cast<double>(truths.size());
    };

    for (long iter = 0; iter < kMaxIterations; ++iter) {
        std::vector<double> next(components, 0.0);
        for (std::size_t i = 0; i < truths.size(); ++i) {
            double mix = 0.0;
            for (std::size_t c = 0; c < components; ++c) {
                mix += result.weights[c] * masses[i][c];
            }
            for (std::size_t c = 0; c < components; ++c) {
                next[c] += result.weights[c] * masses[i][c] / mix;
            }
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < components; ++c) {
            next[c] /= static_cast<double>(truths.size());
            shift = std::max(shift, std::abs(next[c] - result.weights[c]));
        }
        result.weights = std::move(next);
        result.iterations = iter + 1;
        result.objective_path.push_back(objective(result.weights));
        if (shift < kWeightTolerance) break;
    }
    return result;
}

} // namespace epifor
