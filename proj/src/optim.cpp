#include "epifor/optim.hpp"

#include <algorithm>
#include <cmath>

namespace epifor::optim {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

double diameter(const std::vector<std::vector<double>>& simplex) {
    double d = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i) {
        for (std::size_t j = 0; j < simplex[i].size(); ++j) {
            d = std::max(d, std::abs(simplex[i][j] - simplex[0][j]));
        }
    }
    return d;
}

} // namespace

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& start, double step, double tol,
                          long max_iter) {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> simplex(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
    std::vector<double> fx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fx[i] = f(simplex[i]);

    SimplexResult result;
    for (long iter = 0; iter < max_iter; ++iter) {
        std::vector<std::size_t> order(n + 1);
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        {
            std::vector<std::vector<double>> sorted_pts(n + 1);
            std::vector<double> sorted_fx(n + 1);
            for (std::size_t i = 0; i <= n; ++i) {
                sorted_pts[i] = simplex[order[i]];
                sorted_fx[i] = fx[order[i]];
            }
            simplex = std::move(sorted_pts);
            fx = std::move(sorted_fx);
        }
        result.iterations = iter;
        if (diameter(simplex) < tol && std::abs(fx[n] - fx[0]) < tol) {
            result.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto blend = [&](double coeff) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j) {
                p[j] = centroid[j] + coeff * (simplex[n][j] - centroid[j]);
            }
            return p;
        };

        const auto reflected = blend(-kReflect);
        const double f_reflected = f(reflected);
        if (f_reflected < fx[0]) {
            const auto expanded = blend(-kExpand);
            const double f_expanded = f(expanded);
            if (f_expanded < f_reflected) {
                simplex[n] = expanded;
                fx[n] = f_expanded;
            } else {
                simplex[n] = reflected;
                fx[n] = f_reflected;
            }
            continue;
        }
        if (f_reflected < fx[n - 1]) {
            simplex[n] = reflected;
            fx[n] = f_reflected;
            continue;
        }
        const auto contracted = blend(kContract);
        const double f_contracted = f(contracted);
        if (f_contracted < fx[n]) {
            simplex[n] = contracted;
            fx[n] = f_contracted;
            continue;
        }
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                simplex[i][j] = simplex[0][j] + kShrink * (simplex[i][j] - simplex[0][j]);
            }
            fx[i] = f(simplex[i]);
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (fx[i] < fx[best]) best = i;
    }
    result.x = simplex[best];
    result.fx = fx[best];
    return result;
}

} // namespace epifor::optim
