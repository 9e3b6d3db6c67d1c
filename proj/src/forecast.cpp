#include "epifor/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "epifor/common.hpp"

namespace epifor {

namespace {

constexpr double kMassTolerance = 1e-9;

void require_valid(const BinnedForecast& density) {
    const auto report = validate(density);
    if (!report.ok()) throw ArgumentError("invalid binned forecast: " + report.violations.front());
}

void require_valid(const SampleForecast& density) {
    const auto report = validate(density);
    if (!report.ok()) throw ArgumentError("invalid sample forecast: " + report.violations.front());
}

std::vector<double> sorted_samples(const SampleForecast& density) {
    std::vector<double> s = density.samples;
    std::sort(s.begin(), s.end());
    return s;
}

} // namespace

ValidationResult validate(const BinnedForecast& density, bool require_nonnegative_support) {
    ValidationResult result;
    if (density.edges.size() < 2) {
        result.violations.push_back("needs at least one bin (two edges)");
        return result;
    }
    if (density.probs.size() + 1 != density.edges.size()) {
        std::ostringstream out;
        out << density.probs.size() << " probabilities do not match " << density.edges.size()
            << " edges";
        result.violations.push_back(out.str());
        return result;
    }
    for (std::size_t i = 0; i + 1 < density.edges.size(); ++i) {
        if (!(density.edges[i] < density.edges[i + 1])) {
            result.violations.push_back("edges not strictly increasing");
            break;
        }
    }
    for (double e : density.edges) {
        if (!std::isfinite(e)) {
            result.violations.push_back("non-finite edge");
            break;
        }
    }
    double mass = 0.0;
    bool negative = false;
    for (double p : density.probs) {
        if (!std::isfinite(p)) {
            result.violations.push_back("non-finite probability");
            return result;
        }
        if (p < 0.0) negative = true;
        mass += p;
    }
    if (negative) result.violations.push_back("negative probability mass");
    if (std::abs(mass - 1.0) > kMassTolerance) {
        std::ostringstream out;
        out << "mass " << mass << " != 1";
        result.violations.push_back(out.str());
    }
    if (require_nonnegative_support && density.edges.front() < 0.0) {
        // Mass actually placed below zero is what invalidates an incidence
        // forecast; a negative edge with zero mass is tolerated.
        double below = 0.0;
        for (std::size_t i = 0; i < density.probs.size() && density.edges[i] < 0.0; ++i) {
            const double hi = std::min(density.edges[i + 1], 0.0);
            const double width = density.edges[i + 1] - density.edges[i];
            below += density.probs[i] * (hi - density.edges[i]) / width;
        }
        if (below > kMassTolerance) {
            std::ostringstream out;
            out << "support extends below 0 with mass " << below;
            result.violations.push_back(out.str());
        }
    }
    return result;
}

ValidationResult validate(const SampleForecast& density, bool require_nonnegative_support) {
    ValidationResult result;
    if (density.samples.empty()) {
        result.violations.push_back("no samples");
        return result;
    }
    for (double s : density.samples) {
        if (!std::isfinite(s)) {
            result.violations.push_back("non-finite sample");
            break;
        }
    }
    if (require_nonnegative_support) {
        for (double s : density.samples) {
            if (s < 0.0) {
                result.violations.push_back("sample below 0");
                break;
            }
        }
    }
    return result;
}

double cdf_at(const BinnedForecast& density, double z) {
    require_valid(density);
    if (z <= density.edges.front()) return 0.0;
    if (z >= density.edges.back()) return 1.0;
    double cum = 0.0;
    for (std::size_t i = 0; i < density.probs.size(); ++i) {
        const double lo = density.edges[i];
        const double hi = density.edges[i + 1];
        if (z < hi) {
            return cum + density.probs[i] * (z - lo) / (hi - lo);
        }
        cum += density.probs[i];
    }
    return 1.0;
}

double cdf_at(const SampleForecast& density, double z) {
    require_valid(density);
    std::size_t count = 0;
    for (double s : density.samples) {
        if (s <= z) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(density.samples.size());
}

double quantile(const BinnedForecast& density, double p) {
    require_valid(density);
    if (p < 0.0 || p > 1.0) throw ArgumentError("quantile probability outside [0, 1]");
    if (p <= 0.0) return density.edges.front();
    double cum = 0.0;
    for (std::size_t i = 0; i < density.probs.size(); ++i) {
        const double next = cum + density.probs[i];
        if (next >= p) {
            if (density.probs[i] <= 0.0) return density.edges[i];
            const double frac = (p - cum) / density.probs[i];
            return density.edges[i] + frac * (density.edges[i + 1] - density.edges[i]);
        }
        cum = next;
    }
    return density.edges.back();
}

double quantile(const SampleForecast& density, double p) {
    require_valid(density);
    if (p < 0.0 || p > 1.0) throw ArgumentError("quantile probability outside [0, 1]");
    const auto sorted = sorted_samples(density);
    const double n = static_cast<double>(sorted.size());
    if (p <= 0.0) return sorted.front();
    const auto rank = static_cast<std::size_t>(std::ceil(n * p));
    return sorted[std::min(rank, sorted.size()) - 1];
}

PointForecast point_from_density(const BinnedForecast& density, PointLoss loss) {
    require_valid(density);
    if (loss == PointLoss::Squared) return {density_mean(density)};
    return {quantile(density, 0.5)};
}

PointForecast point_from_density(const SampleForecast& density, PointLoss loss) {
    require_valid(density);
    if (loss == PointLoss::Squared) return {stats::mean(density.samples)};
    return {stats::median(density.samples)};
}

IntervalForecast interval_from_density(const BinnedForecast& density, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
    return {alpha, quantile(density, alpha / 2.0), quantile(density, 1.0 - alpha / 2.0)};
}

IntervalForecast interval_from_density(const SampleForecast& density, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
    return {alpha, quantile(density, alpha / 2.0), quantile(density, 1.0 - alpha / 2.0)};
}

double density_mean(const BinnedForecast& density) {
    require_valid(density);
    double m = 0.0;
    for (std::size_t i = 0; i < density.probs.size(); ++i) {
        m += density.probs[i] * 0.5 * (density.edges[i] + density.edges[i + 1]);
    }
    return m;
}

long bin_index(const BinnedForecast& density, double z) {
    if (z < density.edges.front() || z > density.edges.back()) return -1;
    // Half-open bins [lo, hi); the final bin also owns its upper edge.
    const auto it = std::upper_bound(density.edges.begin(), density.edges.end(), z);
    if (it == density.edges.end()) return static_cast<long>(density.probs.size()) - 1;
    const long idx = static_cast<long>(it - density.edges.begin()) - 1;
    return std::min<long>(idx, static_cast<long>(density.probs.size()) - 1);
}

} // namespace epifor
