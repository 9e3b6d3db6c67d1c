#include "epifor/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "epifor/common.hpp"
#include "epifor/errors.hpp"
#include "epifor/optim.hpp"

namespace epifor {

namespace {

enum class Family { SeasonalMedian, HoltWinters, SeasonalAr, Sir, QuadGrowth };

Family parse_family(const std::string& name) {
    if (name == "seasonal_median") return Family::SeasonalMedian;
    if (name == "holt_winters") return Family::HoltWinters;
    if (name == "seasonal_ar") return Family::SeasonalAr;
    if (name == "sir") return Family::Sir;
    if (name == "quad_growth") return Family::QuadGrowth;
    throw ArgumentError("unknown forecaster family '" + name + "'");
}

void require_bin_grid(const ForecasterSpec& spec) {
    if (spec.bin_grid.size() < 2) {
        throw GridError("forecaster '" + spec.model_id() + "' has no usable bin_grid");
    }
    for (std::size_t i = 0; i + 1 < spec.bin_grid.size(); ++i) {
        if (!(spec.bin_grid[i] < spec.bin_grid[i + 1])) {
            throw GridError("bin_grid edges must be strictly increasing");
        }
    }
}

long locate_bin(const std::vector<double>& edges, double z) {
    const long bins = static_cast<long>(edges.size()) - 1;
    if (z < edges.front() || z > edges.back()) return -1;
    const auto it = std::upper_bound(edges.begin(), edges.end(), z);
    if (it == edges.end()) return bins - 1;
    return std::min<long>(static_cast<long>(it - edges.begin()) - 1, bins - 1);
}

BinnedForecast point_mass(const std::vector<double>& edges, double x) {
    BinnedForecast out;
    out.edges = edges;
    out.probs.assign(edges.size() - 1, 0.0);
    const double clamped = std::clamp(x, edges.front(), edges.back());
    out.probs[static_cast<std::size_t>(locate_bin(edges, clamped))] = 1.0;
    return out;
}

double log1p_value(double y) { return std::log(y + 1.0); }
double expm1_value(double z) { return std::max(0.0, std::exp(z) - 1.0); }

// --- seasonal pools ---------------------------------------------------------

std::vector<std::vector<double>> build_pools(const TimeSeries& train) {
    std::vector<std::vector<double>> pools(static_cast<std::size_t>(train.cycle_length()));
    for (long t = 1; t <= train.length(); ++t) {
        pools[static_cast<std::size_t>(season_index(train, t) - 1)].push_back(train.value(t));
    }
    return pools;
}

void require_cycles(const TimeSeries& train, const char* family) {
    if (train.length() < 2 * train.cycle_length()) {
        throw TrainingError(std::string(family) + " needs at least two full cycles of data");
    }
}

// --- Holt-Winters recursions -------------------------------------------------

struct HwRun {
    double level = 0.0;
    double trend = 0.0;
    std::vector<double> seas_by_index; // component for season index 1..L
    double sse = 0.0;
    long n = 0;
    std::vector<std::pair<long, double>> preds;
};

HwRun run_holt_winters(const TimeSeries& train, double a, double b, double g, bool want_preds) {
    const long L = train.cycle_length();
    const long T = train.length();
    HwRun run;
    double m1 = 0.0;
    double m2 = 0.0;
    for (long t = 1; t <= L; ++t) m1 += train.value(t);
    for (long t = L + 1; t <= 2 * L; ++t) m2 += train.value(t);
    m1 /= static_cast<double>(L);
    m2 /= static_cast<double>(L);
    run.level = m1;
    run.trend = (m2 - m1) / static_cast<double>(L);
    run.seas_by_index.assign(static_cast<std::size_t>(L), 0.0);
    for (long t = 1; t <= L; ++t) {
        run.seas_by_index[static_cast<std::size_t>(season_index(train, t) - 1)] =
            train.value(t) - m1;
    }
    for (long t = L + 1; t <= T; ++t) {
        const double y = train.value(t);
        auto& seas = run.seas_by_index[static_cast<std::size_t>(season_index(train, t) - 1)];
        const double pred = run.level + run.trend + seas;
        const double err = y - pred;
        run.sse += err * err;
        ++run.n;
        if (want_preds) run.preds.emplace_back(t, pred);
        const double level_next = a * (y - seas) + (1.0 - a) * (run.level + run.trend);
        const double trend_next = b * (level_next - run.level) + (1.0 - b) * run.trend;
        seas = g * (y - run.level - run.trend) + (1.0 - g) * seas;
        run.level = level_next;
        run.trend = trend_next;
    }
    return run;
}

// --- seasonal autoregression --------------------------------------------------

struct ArConfig {
    long p = 1;
    long harmonics = 1;
    bool log_scale = true;
    long first_fit_t = 2;
};

ArConfig ar_config(const ForecasterSpec& spec) {
    ArConfig cfg;
    cfg.p = std::lround(spec.hyper("p", 1.0));
    cfg.harmonics = std::lround(spec.hyper("harmonics", 1.0));
    cfg.log_scale = spec.hyper("log_scale", 1.0) != 0.0;
    cfg.first_fit_t = std::lround(spec.hyper("first_fit_t", static_cast<double>(cfg.p + 1)));
    if (cfg.p < 1) throw ArgumentError("seasonal_ar lag order p must be >= 1");
    if (cfg.harmonics < 0) throw ArgumentError("seasonal_ar harmonics must be >= 0");
    if (cfg.first_fit_t < cfg.p + 1) {
        throw ArgumentError("seasonal_ar first_fit_t must leave room for p lags");
    }
    return cfg;
}

std::vector<double> transformed_values(const TimeSeries& train, bool log_scale) {
    std::vector<double> z(train.values().begin(), train.values().end());
    if (log_scale) {
        for (double& v : z) v = log1p_value(v);
    }
    return z;
}

long ar_columns(const ArConfig& cfg) { return 1 + cfg.p + 2 * cfg.harmonics; }

void fill_ar_row(Eigen::MatrixXd& x, long row, const std::vector<double>& z, long t,
                 const ArConfig& cfg, const TimeSeries& train) {
    long col = 0;
    x(row, col++) = 1.0;
    for (long lag = 1; lag <= cfg.p; ++lag) {
        x(row, col++) = z[static_cast<std::size_t>(t - lag - 1)];
    }
    const double phase =
        2.0 * M_PI * static_cast<double>(season_index(train, t)) / static_cast<double>(train.cycle_length());
    for (long j = 1; j <= cfg.harmonics; ++j) {
        x(row, col++) = std::sin(static_cast<double>(j) * phase);
        x(row, col++) = std::cos(static_cast<double>(j) * phase);
    }
}

std::vector<double> ar_coefficients(const FitResult& fit, const ArConfig& cfg) {
    std::vector<double> coef;
    coef.push_back(fit.parameters.at("intercept"));
    for (long lag = 1; lag <= cfg.p; ++lag) {
        coef.push_back(fit.parameters.at("lag_" + std::to_string(lag)));
    }
    for (long j = 1; j <= cfg.harmonics; ++j) {
        coef.push_back(fit.parameters.at("sin_" + std::to_string(j)));
        coef.push_back(fit.parameters.at("cos_" + std::to_string(j)));
    }
    return coef;
}

double ar_predict(const std::vector<double>& coef, const std::vector<double>& history, long t,
                  const ArConfig& cfg, const TimeSeries& train) {
    std::size_t col = 0;
    double z = coef[col++];
    for (long lag = 1; lag <= cfg.p; ++lag) {
        z += coef[col++] * history[history.size() - static_cast<std::size_t>(lag)];
    }
    const double phase =
        2.0 * M_PI * static_cast<double>(season_index(train, t)) / static_cast<double>(train.cycle_length());
    for (long j = 1; j <= cfg.harmonics; ++j) {
        z += coef[col++] * std::sin(static_cast<double>(j) * phase);
        z += coef[col++] * std::cos(static_cast<double>(j) * phase);
    }
    return z;
}

// --- SIR ----------------------------------------------------------------------

struct SirConfig {
    double n_pop = 0.0;
    long substeps = 20;
};

SirConfig sir_config(const ForecasterSpec& spec) {
    SirConfig cfg;
    if (!spec.has_hyper("N")) throw ArgumentError("sir requires hyperparameter N (population)");
    cfg.n_pop = spec.hyper("N", 0.0);
    if (!(cfg.n_pop > 0.0)) throw ArgumentError("sir population N must be positive");
    cfg.substeps = std::lround(spec.hyper("steps_per_unit", 20.0));
    if (cfg.substeps < 1) throw ArgumentError("sir steps_per_unit must be >= 1");
    return cfg;
}

/// Model incidence per interval for (beta, gamma, I0); optionally the SSE
/// against observations.
std::vector<double> sir_incidence(double beta, double gamma, double i0, double n_pop, long t_len,
                                  long substeps) {
    SIRState state;
    state.N = n_pop;
    state.S = n_pop - i0;
    state.I = i0;
    state.R = 0.0;
    state.beta = beta;
    state.gamma = gamma;
    std::vector<double> inc(static_cast<std::size_t>(t_len));
    for (long t = 0; t < t_len; ++t) {
        const double s_before = state.S;
        state = sir_interval(state, substeps);
        inc[static_cast<std::size_t>(t)] = s_before - state.S;
    }
    return inc;
}

double sir_sse(const std::vector<double>& params_log, const TimeSeries& train,
               const SirConfig& cfg) {
    const double beta = std::exp(params_log[0]);
    const double gamma = std::exp(params_log[1]);
    const double i0 = std::exp(params_log[2]);
    if (!std::isfinite(beta) || !std::isfinite(gamma) || !std::isfinite(i0) ||
        i0 >= cfg.n_pop) {
        return 1e30;
    }
    const auto inc = sir_incidence(beta, gamma, i0, cfg.n_pop, train.length(), cfg.substeps);
    double sse = 0.0;
    for (long t = 1; t <= train.length(); ++t) {
        const double e = train.value(t) - inc[static_cast<std::size_t>(t - 1)];
        sse += e * e;
    }
    return std::isfinite(sse) ? sse : 1e30;
}

SIRState sir_end_state(const FitResult& fit, const SirConfig& cfg, long t_len) {
    SIRState state;
    state.N = cfg.n_pop;
    state.beta = fit.parameters.at("beta");
    state.gamma = fit.parameters.at("gamma");
    state.I = fit.parameters.at("I0");
    state.S = cfg.n_pop - state.I;
    state.R = 0.0;
    for (long t = 0; t < t_len; ++t) state = sir_interval(state, cfg.substeps);
    return state;
}

// --- quadratic growth -----------------------------------------------------------

std::vector<double> cumulative(const TimeSeries& train) {
    std::vector<double> c(static_cast<std::size_t>(train.length()) + 1, 0.0);
    for (long t = 1; t <= train.length(); ++t) {
        c[static_cast<std::size_t>(t)] = c[static_cast<std::size_t>(t - 1)] + train.value(t);
    }
    return c;
}

// --- family fits ---------------------------------------------------------------

FitResult fit_seasonal_median(const ForecasterSpec&, const TimeSeries& train) {
    require_cycles(train, "seasonal_median");
    FitResult result;
    result.season_pools = build_pools(train);
    std::vector<double> residuals;
    residuals.reserve(static_cast<std::size_t>(train.length()));
    for (long t = 1; t <= train.length(); ++t) {
        const auto& pool = result.season_pools[static_cast<std::size_t>(season_index(train, t) - 1)];
        residuals.push_back(train.value(t) - stats::median(pool));
    }
    double sse = 0.0;
    for (double r : residuals) sse += r * r;
    result.training_loss = sse;
    result.residual_sd = std::sqrt(sse / std::max<double>(1.0, static_cast<double>(residuals.size() - 1)));
    return result;
}

FitResult fit_holt_winters(const ForecasterSpec&, const TimeSeries& train) {
    require_cycles(train, "holt_winters");
    double best_a = 0.0, best_b = 0.0, best_g = 0.0;
    double best_sse = std::numeric_limits<double>::infinity();
    for (int ia = 0; ia <= 20; ++ia) {
        for (int ib = 0; ib <= 20; ++ib) {
            for (int ig = 0; ig <= 20; ++ig) {
                const double a = ia * 0.05, b = ib * 0.05, g = ig * 0.05;
                const double sse = run_holt_winters(train, a, b, g, false).sse;
                if (sse < best_sse) {
                    best_sse = sse;
                    best_a = a;
                    best_b = b;
                    best_g = g;
                }
            }
        }
    }
    const HwRun run = run_holt_winters(train, best_a, best_b, best_g, false);
    FitResult result;
    result.parameters["alpha"] = best_a;
    result.parameters["beta"] = best_b;
    result.parameters["gamma"] = best_g;
    result.parameters["level"] = run.level;
    result.parameters["trend"] = run.trend;
    for (long i = 1; i <= train.cycle_length(); ++i) {
        result.parameters["seas_" + std::to_string(i)] =
            run.seas_by_index[static_cast<std::size_t>(i - 1)];
    }
    result.training_loss = run.sse;
    result.residual_sd = std::sqrt(run.sse / std::max<double>(1.0, static_cast<double>(run.n - 3)));
    return result;
}

FitResult fit_seasonal_ar(const ForecasterSpec& spec, const TimeSeries& train) {
    require_cycles(train, "seasonal_ar");
    const ArConfig cfg = ar_config(spec);
    const long cols = ar_columns(cfg);
    const long rows = train.length() - cfg.first_fit_t + 1;
    if (rows <= cols) {
        throw TrainingError("seasonal_ar has fewer usable rows than coefficients");
    }
    const auto z = transformed_values(train, cfg.log_scale);
    Eigen::MatrixXd x(rows, cols);
    Eigen::VectorXd y(rows);
    for (long t = cfg.first_fit_t; t <= train.length(); ++t) {
        const long row = t - cfg.first_fit_t;
        fill_ar_row(x, row, z, t, cfg, train);
        y(row) = z[static_cast<std::size_t>(t - 1)];
    }
    Eigen::VectorXd coef = x.colPivHouseholderQr().solve(y);
    const double sse = (x * coef - y).squaredNorm();
    FitResult result;
    long col = 0;
    result.parameters["intercept"] = coef(col++);
    for (long lag = 1; lag <= cfg.p; ++lag) {
        result.parameters["lag_" + std::to_string(lag)] = coef(col++);
    }
    for (long j = 1; j <= cfg.harmonics; ++j) {
        result.parameters["sin_" + std::to_string(j)] = coef(col++);
        result.parameters["cos_" + std::to_string(j)] = coef(col++);
    }
    result.training_loss = sse;
    result.residual_sd = std::sqrt(sse / static_cast<double>(std::max<long>(1, rows - cols)));
    return result;
}

FitResult fit_sir(const ForecasterSpec& spec, const TimeSeries& train) {
    if (train.length() < 4) throw TrainingError("sir needs at least 4 observations");
    const SirConfig cfg = sir_config(spec);
    const double anchor = std::max(train.value(1), 1.0);
    const double betas[] = {0.1, 0.3, 0.5, 1.0, 2.0};
    const double gammas[] = {0.05, 0.1, 0.2, 0.5, 1.0};
    const double i0_mults[] = {0.2, 1.0, 5.0, 25.0, 125.0};
    auto objective = [&](const std::vector<double>& p) { return sir_sse(p, train, cfg); };
    optim::SimplexResult best;
    best.fx = std::numeric_limits<double>::infinity();
    bool any = false;
    for (double beta : betas) {
        for (double gamma : gammas) {
            for (double mult : i0_mults) {
                const double i0 = std::min(mult * anchor, 0.5 * cfg.n_pop);
                const std::vector<double> start = {std::log(beta), std::log(gamma), std::log(i0)};
                const auto run = optim::nelder_mead(objective, start, 0.5, 1e-8, 2000);
                if (!any || run.fx < best.fx) {
                    best = run;
                    any = true;
                }
            }
        }
    }
    FitResult result;
    result.parameters["beta"] = std::exp(best.x[0]);
    result.parameters["gamma"] = std::exp(best.x[1]);
    result.parameters["I0"] = std::exp(best.x[2]);
    result.parameters["N"] = cfg.n_pop;
    result.training_loss = best.fx;
    result.residual_sd = std::sqrt(best.fx / static_cast<double>(train.length()));
    result.converged = best.converged;
    return result;
}

FitResult fit_quad_growth(const ForecasterSpec&, const TimeSeries& train) {
    if (train.length() < 4) throw TrainingError("quad_growth needs at least 4 observations");
    const auto c = cumulative(train);
    const long rows = train.length() - 1;
    Eigen::MatrixXd x(rows, 2);
    Eigen::VectorXd y(rows);
    for (long t = 2; t <= train.length(); ++t) {
        const double prev = c[static_cast<std::size_t>(t - 1)];
        x(t - 2, 0) = prev;
        x(t - 2, 1) = prev * prev;
        y(t - 2) = train.value(t);
    }
    Eigen::VectorXd coef = x.colPivHouseholderQr().solve(y);
    const double sse = (x * coef - y).squaredNorm();
    FitResult result;
    const double b1 = coef(0);
    const double b2 = coef(1);
    result.parameters["b1"] = b1;
    result.parameters["b2"] = b2;
    result.parameters["a"] = b1;
    if (b2 < 0.0) result.parameters["K"] = -b1 / b2;
    result.training_loss = sse;
    result.residual_sd =
        std::sqrt(sse / static_cast<double>(std::max<long>(1, rows - 2)));
    result.converged = b2 < 0.0;
    return result;
}

// --- mean trajectories ------------------------------------------------------------

struct Trajectory {
    std::vector<double> natural;   // expected incidence per future step
    std::vector<double> fit_scale; // same, on the family's fitting scale
};

Trajectory trajectory_for(const ForecasterSpec& spec, const FitResult& fit,
                          const TimeSeries& train, long horizon) {
    const Family family = parse_family(spec.family);
    const long t_len = train.length();
    Trajectory out;
    out.natural.reserve(static_cast<std::size_t>(horizon));
    switch (family) {
    case Family::SeasonalMedian: {
        for (long k = 1; k <= horizon; ++k) {
            const auto& pool =
                fit.season_pools[static_cast<std::size_t>(season_index(train, t_len + k) - 1)];
            out.natural.push_back(stats::median(pool));
        }
        break;
    }
    case Family::HoltWinters: {
        const double level = fit.parameters.at("level");
        const double trend = fit.parameters.at("trend");
        for (long k = 1; k <= horizon; ++k) {
            const long si = season_index(train, t_len + k);
            out.natural.push_back(level + static_cast<double>(k) * trend +
                                  fit.parameters.at("seas_" + std::to_string(si)));
        }
        break;
    }
    case Family::SeasonalAr: {
        const ArConfig cfg = ar_config(spec);
        const auto coef = ar_coefficients(fit, cfg);
        std::vector<double> history = transformed_values(train, cfg.log_scale);
        out.fit_scale.reserve(static_cast<std::size_t>(horizon));
        for (long k = 1; k <= horizon; ++k) {
            const double z = ar_predict(coef, history, t_len + k, cfg, train);
            history.push_back(z);
            out.fit_scale.push_back(z);
            out.natural.push_back(cfg.log_scale ? expm1_value(z) : std::max(0.0, z));
        }
        return out;
    }
    case Family::Sir: {
        const SirConfig cfg = sir_config(spec);
        SIRState state = sir_end_state(fit, cfg, t_len);
        for (long k = 1; k <= horizon; ++k) {
            const double s_before = state.S;
            state = sir_interval(state, cfg.substeps);
            out.natural.push_back(s_before - state.S);
        }
        break;
    }
    case Family::QuadGrowth: {
        const double b1 = fit.parameters.at("b1");
        const double b2 = fit.parameters.at("b2");
        double c = 0.0;
        for (long t = 1; t <= t_len; ++t) c += train.value(t);
        for (long k = 1; k <= horizon; ++k) {
            const double inc = std::max(0.0, b1 * c + b2 * c * c);
            out.natural.push_back(inc);
            c += inc;
        }
        break;
    }
    }
    out.fit_scale = out.natural;
    return out;
}

double horizon_scale(Family family, long k) {
    return family == Family::SeasonalAr ? static_cast<double>(k) : 1.0;
}

// --- density construction ---------------------------------------------------------

/// Bin masses for a Gaussian on the family's fitting scale. For log-scale
/// fits the bin edges are mapped through log(y+1) so the natural-scale
/// density is lognormal-shaped; truncation below zero is applied on the
/// fitting scale in both cases.
BinnedForecast step_density_gaussian(const ForecasterSpec& spec, double mu_fit, double sd,
                                     bool log_scale) {
    if (!log_scale) return discretize_gaussian(mu_fit, sd, spec.bin_grid, 0.0);
    std::vector<double> edges_z(spec.bin_grid.size());
    for (std::size_t i = 0; i < spec.bin_grid.size(); ++i) {
        if (spec.bin_grid[i] <= -1.0) {
            throw GridError("log-scale forecaster needs bin edges > -1");
        }
        edges_z[i] = log1p_value(spec.bin_grid[i]);
    }
    BinnedForecast on_z = discretize_gaussian(mu_fit, sd, edges_z, 0.0);
    on_z.edges = spec.bin_grid;
    return on_z;
}

/// Draws one simulated future value for step k, on the natural scale.
class TrajectorySampler {
public:
    TrajectorySampler(const ForecasterSpec& spec, const FitResult& fit, const TimeSeries& train,
                      const Trajectory& trajectory)
        : family_(parse_family(spec.family)),
          fit_(fit),
          train_(train),
          trajectory_(trajectory),
          log_scale_(family_ == Family::SeasonalAr && spec.hyper("log_scale", 1.0) != 0.0) {}

    double draw(long k, rng::Engine& eng) const {
        if (family_ == Family::SeasonalMedian) {
            const auto& pool = fit_.season_pools[static_cast<std::size_t>(
                season_index(train_, train_.length() + k) - 1)];
            return pool[static_cast<std::size_t>(rng::below(eng, pool.size()))];
        }
        const double sd = fit_.residual_sd * std::sqrt(horizon_scale(family_, k));
        const double noise = sd * rng::normal(eng);
        const std::size_t idx = static_cast<std::size_t>(k - 1);
        if (log_scale_) return expm1_value(trajectory_.fit_scale[idx] + noise);
        return std::max(0.0, trajectory_.fit_scale[idx] + noise);
    }

private:
    Family family_;
    const FitResult& fit_;
    const TimeSeries& train_;
    const Trajectory& trajectory_;
    bool log_scale_;
};

Season forecast_season(const TimeSeries& train, const Season& season) {
    const Season s = season.resolved() ? season : train.season(season.label);
    if (s.first < 1 || s.last < s.first) {
        throw ArgumentError("season '" + s.label + "' has an invalid range");
    }
    return s;
}

} // namespace

double ForecasterSpec::hyper(const std::string& name, double fallback) const {
    const auto it = hyperparameters.find(name);
    return it == hyperparameters.end() ? fallback : it->second;
}

bool ForecasterSpec::has_hyper(const std::string& name) const {
    return hyperparameters.find(name) != hyperparameters.end();
}

BinnedForecast discretize_gaussian(double mu, double sd, const std::vector<double>& edges,
                                   double truncate_at) {
    if (edges.size() < 2) throw GridError("discretize_gaussian needs at least one bin");
    if (sd < 1e-12) return point_mass(edges, std::max(mu, truncate_at));
    const double below = stats::normal_cdf((truncate_at - mu) / sd);
    const double kept = 1.0 - below;
    if (kept < 1e-12) return point_mass(edges, truncate_at);
    auto cdf = [&](double x) {
        if (x <= truncate_at) return 0.0;
        return (stats::normal_cdf((x - mu) / sd) - below) / kept;
    };
    BinnedForecast out;
    out.edges = edges;
    out.probs.resize(edges.size() - 1);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        out.probs[i] = cdf(edges[i + 1]) - cdf(edges[i]);
    }
    out.probs.front() += cdf(edges.front());
    out.probs.back() += 1.0 - cdf(edges.back());
    double total = 0.0;
    for (double p : out.probs) total += p;
    if (total <= 0.0) return point_mass(edges, std::max(mu, truncate_at));
    for (double& p : out.probs) p /= total;
    return out;
}

BinnedForecast discretize_empirical(const std::vector<double>& values,
                                    const std::vector<double>& edges) {
    if (edges.size() < 2) throw GridError("discretize_empirical needs at least one bin");
    if (values.empty()) throw ArgumentError("discretize_empirical needs at least one value");
    BinnedForecast out;
    out.edges = edges;
    out.probs.assign(edges.size() - 1, 0.0);
    const double share = 1.0 / static_cast<double>(values.size());
    for (double v : values) {
        const double clamped = std::clamp(v, edges.front(), edges.back());
        out.probs[static_cast<std::size_t>(locate_bin(edges, clamped))] += share;
    }
    return out;
}

FitResult fit(const ForecasterSpec& spec, const TimeSeries& train) {
    switch (parse_family(spec.family)) {
    case Family::SeasonalMedian:
        return fit_seasonal_median(spec, train);
    case Family::HoltWinters:
        return fit_holt_winters(spec, train);
    case Family::SeasonalAr:
        return fit_seasonal_ar(spec, train);
    case Family::Sir:
        return fit_sir(spec, train);
    case Family::QuadGrowth:
        return fit_quad_growth(spec, train);
    }
    throw ArgumentError("unknown forecaster family");
}

std::vector<Forecast> forecast(const ForecasterSpec& spec, const FitResult& fit,
                               const TimeSeries& train, const std::vector<Target>& targets) {
    const Family family = parse_family(spec.family);
    const long t_len = train.length();

    long horizon = 0;
    std::vector<Season> seasons(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const Target& target = targets[i];
        switch (target.kind) {
        case Target::Kind::StepAhead:
        case Target::Kind::ThresholdExceedance: {
            const long steps = target.origin_t + target.k - t_len;
            if (steps < 1) {
                throw HorizonError("target " + target.describe() +
                                   " is at or before the end of training");
            }
            horizon = std::max(horizon, steps);
            break;
        }
        case Target::Kind::PeakIncidence:
        case Target::Kind::PeakTiming: {
            seasons[i] = forecast_season(train, target.season);
            horizon = std::max(horizon, seasons[i].last - t_len);
            break;
        }
        }
    }

    const Trajectory trajectory = trajectory_for(spec, fit, train, horizon);
    const TrajectorySampler sampler(spec, fit, train, trajectory);
    const bool log_scale = family == Family::SeasonalAr && spec.hyper("log_scale", 1.0) != 0.0;

    auto step_density = [&](long k) -> BinnedForecast {
        require_bin_grid(spec);
        if (family == Family::SeasonalMedian) {
            const auto& pool =
                fit.season_pools[static_cast<std::size_t>(season_index(train, t_len + k) - 1)];
            return discretize_empirical(pool, spec.bin_grid);
        }
        const double sd = fit.residual_sd * std::sqrt(horizon_scale(family, k));
        return step_density_gaussian(spec, trajectory.fit_scale[static_cast<std::size_t>(k - 1)],
                                     sd, log_scale);
    };

    std::vector<Forecast> out;
    out.reserve(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const Target& target = targets[i];
        rng::Engine eng(rng::derive(spec.seed, "mc:" + target.describe()));
        BinnedForecast density;
        switch (target.kind) {
        case Target::Kind::StepAhead:
            density = step_density(target.origin_t + target.k - t_len);
            break;
        case Target::Kind::ThresholdExceedance: {
            const long steps = target.origin_t + target.k - t_len;
            long hits = 0;
            for (long d = 0; d < kTrajectoryDraws; ++d) {
                if (sampler.draw(steps, eng) > target.threshold) ++hits;
            }
            density.edges = {-0.5, 0.5, 1.5};
            const double p_true = static_cast<double>(hits) / static_cast<double>(kTrajectoryDraws);
            density.probs = {1.0 - p_true, p_true};
            break;
        }
        case Target::Kind::PeakIncidence: {
            require_bin_grid(spec);
            const Season& s = seasons[i];
            std::vector<double> draws(kTrajectoryDraws);
            double observed_peak = -std::numeric_limits<double>::infinity();
            for (long t = s.first; t <= std::min(s.last, t_len); ++t) {
                observed_peak = std::max(observed_peak, train.value(t));
            }
            for (long d = 0; d < kTrajectoryDraws; ++d) {
                double peak = observed_peak;
                for (long t = std::max(s.first, t_len + 1); t <= s.last; ++t) {
                    peak = std::max(peak, sampler.draw(t - t_len, eng));
                }
                draws[static_cast<std::size_t>(d)] = peak;
            }
            density = discretize_empirical(draws, spec.bin_grid);
            break;
        }
        case Target::Kind::PeakTiming: {
            const Season& s = seasons[i];
            std::vector<double> observed(static_cast<std::size_t>(std::max<long>(
                                             0, std::min(s.last, t_len) - s.first + 1)));
            for (std::size_t j = 0; j < observed.size(); ++j) {
                observed[j] = train.value(s.first + static_cast<long>(j));
            }
            std::vector<double> draws(kTrajectoryDraws);
            for (long d = 0; d < kTrajectoryDraws; ++d) {
                double peak = -std::numeric_limits<double>::infinity();
                long at = s.first;
                for (long t = s.first; t <= s.last; ++t) {
                    const double v = t <= t_len
                                         ? observed[static_cast<std::size_t>(t - s.first)]
                                         : sampler.draw(t - t_len, eng);
                    if (v > peak) {
                        peak = v;
                        at = t;
                    }
                }
                draws[static_cast<std::size_t>(d)] = static_cast<double>(at);
            }
            std::vector<double> edges;
            edges.reserve(static_cast<std::size_t>(s.length()) + 1);
            for (long t = s.first; t <= s.last + 1; ++t) {
                edges.push_back(static_cast<double>(t) - 0.5);
            }
            density = discretize_empirical(draws, edges);
            break;
        }
        }
        Forecast f;
        f.location = train.location();
        f.origin_t = t_len;
        f.target = target;
        f.repr = std::move(density);
        out.push_back(std::move(f));
    }
    return out;
}

SIRState sir_step(const SIRState& state, double dt) {
    const double n_pop = state.N;
    auto ds = [&](double s, double i) { return -state.beta * s * i / n_pop; };
    auto di = [&](double s, double i) { return state.beta * s * i / n_pop - state.gamma * i; };
    const double s0 = state.S, i0 = state.I;
    const double k1s = ds(s0, i0), k1i = di(s0, i0);
    const double k2s = ds(s0 + 0.5 * dt * k1s, i0 + 0.5 * dt * k1i);
    const double k2i = di(s0 + 0.5 * dt * k1s, i0 + 0.5 * dt * k1i);
    const double k3s = ds(s0 + 0.5 * dt * k2s, i0 + 0.5 * dt * k2i);
    const double k3i = di(s0 + 0.5 * dt * k2s, i0 + 0.5 * dt * k2i);
    const double k4s = ds(s0 + dt * k3s, i0 + dt * k3i);
    const double k4i = di(s0 + dt * k3s, i0 + dt * k3i);
    SIRState next = state;
    next.S = std::max(0.0, s0 + dt / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s));
    next.I = std::max(0.0, i0 + dt / 6.0 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i));
    // Recovered by conservation, so S + I + R stays pinned to N.
    next.R = n_pop - next.S - next.I;
    return next;
}

SIRState sir_interval(const SIRState& state, long substeps) {
    SIRState s = state;
    const double dt = 1.0 / static_cast<double>(substeps);
    for (long i = 0; i < substeps; ++i) s = sir_step(s, dt);
    return s;
}

TimeSeries simulate_sir(const SIRState& params, long t_len, double noise_sd, std::uint64_t seed) {
    if (t_len < 1) throw ArgumentError("simulate_sir needs t_len >= 1");
    rng::Engine eng(seed);
    SIRState state = params;
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(t_len));
    for (long t = 0; t < t_len; ++t) {
        const double s_before = state.S;
        state = sir_interval(state, 20);
        double inc = s_before - state.S;
        if (noise_sd > 0.0) inc *= std::exp(noise_sd * rng::normal(eng));
        values.push_back(std::max(0.0, inc));
    }
    return TimeSeries("sir_sim", 1, std::move(values), 1);
}

std::vector<double> mean_trajectory(const ForecasterSpec& spec, const FitResult& fit,
                                    const TimeSeries& train, long horizon) {
    if (horizon < 1) throw ArgumentError("mean_trajectory needs horizon >= 1");
    return trajectory_for(spec, fit, train, horizon).natural;
}

std::vector<std::pair<long, double>> in_sample_predictions(const ForecasterSpec& spec,
                                                           const FitResult& fit,
                                                           const TimeSeries& train) {
    std::vector<std::pair<long, double>> preds;
    switch (parse_family(spec.family)) {
    case Family::SeasonalMedian: {
        for (long t = 1; t <= train.length(); ++t) {
            const auto& pool =
                fit.season_pools[static_cast<std::size_t>(season_index(train, t) - 1)];
            preds.emplace_back(t, stats::median(pool));
        }
        break;
    }
    case Family::HoltWinters: {
        const HwRun run = run_holt_winters(train, fit.parameters.at("alpha"),
                                           fit.parameters.at("beta"), fit.parameters.at("gamma"),
                                           true);
        preds = run.preds;
        break;
    }
    case Family::SeasonalAr: {
        const ArConfig cfg = ar_config(spec);
        const auto coef = ar_coefficients(fit, cfg);
        const auto z = transformed_values(train, cfg.log_scale);
        for (long t = cfg.first_fit_t; t <= train.length(); ++t) {
            std::vector<double> history(z.begin(), z.begin() + (t - 1));
            const double pred = ar_predict(coef, history, t, cfg, train);
            preds.emplace_back(t, cfg.log_scale ? expm1_value(pred) : pred);
        }
        break;
    }
    case Family::Sir: {
        const SirConfig cfg = sir_config(spec);
        const auto inc = sir_incidence(fit.parameters.at("beta"), fit.parameters.at("gamma"),
                                       fit.parameters.at("I0"), cfg.n_pop, train.length(),
                                       cfg.substeps);
        for (long t = 1; t <= train.length(); ++t) {
            preds.emplace_back(t, inc[static_cast<std::size_t>(t - 1)]);
        }
        break;
    }
    case Family::QuadGrowth: {
        const auto c = cumulative(train);
        const double b1 = fit.parameters.at("b1");
        const double b2 = fit.parameters.at("b2");
        for (long t = 2; t <= train.length(); ++t) {
            const double prev = c[static_cast<std::size_t>(t - 1)];
            preds.emplace_back(t, b1 * prev + b2 * prev * prev);
        }
        break;
    }
    }
    return preds;
}

long model_size(const ForecasterSpec& spec) {
    switch (parse_family(spec.family)) {
    case Family::SeasonalMedian:
        return 1;
    case Family::HoltWinters:
        return 3;
    case Family::Sir:
        return 3;
    case Family::QuadGrowth:
        return 2;
    case Family::SeasonalAr: {
        const ArConfig cfg = ar_config(spec);
        return cfg.p + 2 * cfg.harmonics;
    }
    }
    return 0;
}

} // namespace epifor
