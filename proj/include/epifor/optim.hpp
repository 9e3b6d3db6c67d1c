#pragma once

#include <functional>
#include <vector>

namespace epifor::optim {

struct SimplexResult {
    std::vector<double> x;
    double fx = 0.0;
    bool converged = false;
    long iterations = 0;
};

/// Downhill-simplex minimization. Stops when the simplex diameter and the
/// spread of function values both fall below tol, or after max_iter steps.
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& start, double step, double tol,
                          long max_iter);

} // namespace epifor::optim
