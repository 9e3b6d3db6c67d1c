// Batch front end: validate data files, run the full cross-validation /
// selection / rolling-test pipeline from a JSON config, or score forecast
// documents against a truth file.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "epifor/common.hpp"
#include "epifor/ensemble.hpp"
#include "epifor/errors.hpp"
#include "epifor/harness.hpp"
#include "epifor/io.hpp"
#include "epifor/models.hpp"
#include "epifor/nowcast.hpp"
#include "epifor/scoring.hpp"

namespace {

using nlohmann::json;
using namespace epifor;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

std::string hex64(std::uint64_t x) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[x & 0xf];
        x >>= 4;
    }
    return out;
}

/// Re-throws config/data errors unchanged and tags everything else with the
/// pipeline stage so the exit-4 message names where the run failed.
template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const ConfigError&) {
        throw;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("stage ") + name + " failed: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Metrics registry shared by `run` and `score`.
// ---------------------------------------------------------------------------

struct Metric {
    enum class Kind { Mae, Crps, LogScore, Coverage, IntervalScore };
    Kind kind = Kind::Mae;
    double alpha = 0.0; // Coverage / IntervalScore level
    std::string name;
};

Metric parse_metric(const std::string& name) {
    Metric m;
    m.name = name;
    if (name == "mae") {
        m.kind = Metric::Kind::Mae;
        return m;
    }
    if (name == "crps") {
        m.kind = Metric::Kind::Crps;
        return m;
    }
    if (name == "log_score") {
        m.kind = Metric::Kind::LogScore;
        return m;
    }
    for (const auto& [prefix, kind] :
         {std::make_pair(std::string("coverage_"), Metric::Kind::Coverage),
          std::make_pair(std::string("interval_score_"), Metric::Kind::IntervalScore)}) {
        if (name.rfind(prefix, 0) == 0) {
            const std::string tail = name.substr(prefix.size());
            try {
                std::size_t used = 0;
                m.alpha = std::stod(tail, &used);
                if (used != tail.size()) throw std::invalid_argument(tail);
            } catch (const std::exception&) {
                throw ConfigError("metric '" + name + "' has a malformed level");
            }
            if (!(m.alpha > 0.0 && m.alpha < 1.0)) {
                throw ConfigError("metric '" + name + "' needs a level in (0,1)");
            }
            m.kind = kind;
            return m;
        }
    }
    throw ConfigError("unknown metric '" + name + "'; known: mae, crps, log_score, "
                      "coverage_<alpha>, interval_score_<alpha>");
}

/// Point summary used by mae; absent for reprs without a usable point.
std::optional<double> point_summary(const ForecastRepr& repr) {
    if (const auto* p = std::get_if<PointForecast>(&repr)) return p->value;
    if (const auto* b = std::get_if<BinnedForecast>(&repr)) {
        return point_from_density(*b, PointLoss::Absolute).value;
    }
    if (const auto* s = std::get_if<SampleForecast>(&repr)) {
        return point_from_density(*s, PointLoss::Absolute).value;
    }
    return std::nullopt;
}

std::optional<IntervalForecast> interval_summary(const ForecastRepr& repr, double alpha) {
    if (const auto* iv = std::get_if<IntervalForecast>(&repr)) {
        return std::abs(iv->alpha - alpha) < 1e-12 ? std::optional<IntervalForecast>(*iv)
                                                   : std::nullopt;
    }
    if (const auto* b = std::get_if<BinnedForecast>(&repr)) return interval_from_density(*b, alpha);
    if (const auto* s = std::get_if<SampleForecast>(&repr)) return interval_from_density(*s, alpha);
    return std::nullopt;
}

/// One metric value for a forecast/truth pair; nullopt when the metric does
/// not apply to the representation.
std::optional<double> metric_value(const Metric& metric, const ForecastRepr& repr, double truth) {
    switch (metric.kind) {
    case Metric::Kind::Mae: {
        const auto point = point_summary(repr);
        if (!point) return std::nullopt;
        return std::abs(*point - truth);
    }
    case Metric::Kind::Crps:
        if (std::holds_alternative<IntervalForecast>(repr)) return std::nullopt;
        return crps(repr, truth);
    case Metric::Kind::LogScore: {
        const auto* b = std::get_if<BinnedForecast>(&repr);
        if (!b) return std::nullopt;
        return log_score_single(*b, truth);
    }
    case Metric::Kind::Coverage: {
        const auto iv = interval_summary(repr, metric.alpha);
        if (!iv) return std::nullopt;
        return truth >= iv->lower && truth <= iv->upper ? 1.0 : 0.0;
    }
    case Metric::Kind::IntervalScore: {
        const auto iv = interval_summary(repr, metric.alpha);
        if (!iv) return std::nullopt;
        return interval_score({*iv}, {truth});
    }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

int cmd_validate(const std::vector<std::string>& paths) {
    bool clean = true;
    for (const auto& path : paths) {
        std::string text;
        try {
            text = io::read_file(path);
        } catch (const DataError& e) {
            std::cout << path << ": " << e.what() << "\n";
            clean = false;
            continue;
        }
        const auto header_end = text.find('\n');
        const std::string header = text.substr(0, header_end);
        io::ValidationReport report;
        if (header.find("event_time") != std::string::npos) {
            io::read_vintage_csv(text, report);
        } else {
            io::read_incidence_csv(text, /*cycle_length=*/1, report);
        }
        for (const auto& v : report.violations) {
            std::cout << path << ":" << v.line << ": " << v.message << "\n";
        }
        clean = clean && report.ok();
    }
    if (clean) std::cout << "ok\n";
    return clean ? kExitOk : kExitData;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

struct RunConfig {
    std::string incidence_path;
    std::string vintage_path; // optional
    long cycle_length = 1;
    json split;
    json models;
    json ensemble; // optional (null when absent)
    std::vector<Metric> metrics;
    long nowcast_k = 0;
    std::string nowcast_profile = "none"; // "none" | "vintage"
    std::string cv_protocol = "loyo";     // "loyo" | "prospective"
    SelectionBand band = SelectionBand::StandardError;
    ErrorScale cv_scale = ErrorScale::Log1p;
    std::string rmae_reference; // model id; default resolved later
    std::uint64_t seed = 0;
    std::string out_dir = "out";
};

void require_fields(const json& doc, const std::vector<std::string>& allowed,
                    const std::string& where) {
    if (!doc.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown field '" + key + "' in " + where);
        }
    }
}

RunConfig parse_run_config(const json& doc) {
    require_fields(doc, {"data", "split", "models", "ensemble", "metrics", "nowcast", "cv",
                         "rmae_reference", "bin_grid", "seed", "out"},
                   "config");
    RunConfig cfg;
    if (!doc.contains("data")) throw ConfigError("config needs a 'data' object");
    const json& data = doc.at("data");
    require_fields(data, {"incidence", "vintage", "cycle_length"}, "data");
    if (!data.contains("incidence")) throw ConfigError("data.incidence path is required");
    cfg.incidence_path = data.at("incidence").get<std::string>();
    cfg.vintage_path = data.value("vintage", "");
    cfg.cycle_length = data.value("cycle_length", 1L);
    if (cfg.cycle_length < 1) throw ConfigError("data.cycle_length must be >= 1");

    if (!doc.contains("split")) throw ConfigError("config needs a 'split' object");
    cfg.split = doc.at("split");
    require_fields(cfg.split, {"training", "testing"}, "split");

    if (!doc.contains("models") || !doc.at("models").is_array() || doc.at("models").empty()) {
        throw ConfigError("config needs a non-empty 'models' array");
    }
    cfg.models = doc.at("models");
    cfg.ensemble = doc.value("ensemble", json());

    const auto metric_names =
        doc.value("metrics", std::vector<std::string>{"mae", "log_score", "crps"});
    if (metric_names.empty()) throw ConfigError("metrics list must not be empty");
    for (const auto& name : metric_names) cfg.metrics.push_back(parse_metric(name));

    if (doc.contains("nowcast")) {
        const json& nc = doc.at("nowcast");
        require_fields(nc, {"truncate_k", "profile"}, "nowcast");
        cfg.nowcast_k = nc.value("truncate_k", 0L);
        if (cfg.nowcast_k < 0) throw ConfigError("nowcast.truncate_k must be >= 0");
        cfg.nowcast_profile = nc.value("profile", "none");
        if (cfg.nowcast_profile != "none" && cfg.nowcast_profile != "vintage") {
            throw ConfigError("nowcast.profile must be 'none' or 'vintage'");
        }
        if (cfg.nowcast_profile == "vintage" && cfg.vintage_path.empty()) {
            throw ConfigError("nowcast.profile 'vintage' needs data.vintage");
        }
    }
    if (doc.contains("cv")) {
        const json& cv = doc.at("cv");
        require_fields(cv, {"protocol", "band", "scale"}, "cv");
        cfg.cv_protocol = cv.value("protocol", "loyo");
        if (cfg.cv_protocol != "loyo" && cfg.cv_protocol != "prospective") {
            throw ConfigError("cv.protocol must be 'loyo' or 'prospective'");
        }
        const std::string band = cv.value("band", "standard_error");
        if (band == "standard_error") cfg.band = SelectionBand::StandardError;
        else if (band == "standard_deviation") cfg.band = SelectionBand::StandardDeviation;
        else throw ConfigError("cv.band must be 'standard_error' or 'standard_deviation'");
        const std::string scale = cv.value("scale", "log1p");
        if (scale == "log1p") cfg.cv_scale = ErrorScale::Log1p;
        else if (scale == "natural") cfg.cv_scale = ErrorScale::Natural;
        else throw ConfigError("cv.scale must be 'log1p' or 'natural'");
    }
    cfg.rmae_reference = doc.value("rmae_reference", "");
    if (!doc.contains("seed")) throw ConfigError("seed is required for reproducibility");
    if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer()) {
        throw ConfigError("seed must be an unsigned integer");
    }
    cfg.seed = doc.at("seed").get<std::uint64_t>();
    cfg.out_dir = doc.value("out", "out");
    return cfg;
}

Season resolve_label(const std::vector<TimeSeries>& data, const std::string& label) {
    Season resolved;
    bool seen = false;
    for (const auto& series : data) {
        const Season* found = nullptr;
        for (const auto& s : series.seasons()) {
            if (s.label == label) found = &s;
        }
        if (!found) {
            throw ConfigError("season '" + label + "' not defined for location " +
                              series.location());
        }
        if (!seen) {
            resolved = *found;
            seen = true;
        } else if (found->first != resolved.first || found->last != resolved.last) {
            throw ConfigError("season '" + label + "' spans different indices across locations");
        }
    }
    if (!seen) throw ConfigError("no data to resolve season '" + label + "' against");
    return resolved;
}

std::vector<Season> resolve_season_list(const json& entries,
                                        const std::vector<TimeSeries>& data) {
    std::vector<Season> out;
    if (!entries.is_array()) throw ConfigError("split lists must be arrays");
    for (const auto& entry : entries) {
        if (entry.is_string()) {
            out.push_back(resolve_label(data, entry.get<std::string>()));
        } else if (entry.is_object()) {
            require_fields(entry, {"label", "first", "last"}, "split season");
            Season s;
            s.label = entry.value("label", "");
            s.first = entry.value("first", 0L);
            s.last = entry.value("last", 0L);
            if (!s.resolved()) throw ConfigError("explicit season needs 1 <= first <= last");
            out.push_back(s);
        } else {
            throw ConfigError("split entries must be season labels or {label,first,last}");
        }
    }
    return out;
}

SplitSpec resolve_split(const json& split, const std::vector<TimeSeries>& data) {
    SplitSpec out;
    if (!split.contains("training") || !split.contains("testing")) {
        throw ConfigError("split needs 'training' and 'testing' season lists");
    }
    out.training_seasons = resolve_season_list(split.at("training"), data);
    out.testing_seasons = resolve_season_list(split.at("testing"), data);
    try {
        validate_split(out);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return out;
}

std::vector<double> default_bin_grid(const std::vector<TimeSeries>& data, const json& doc) {
    if (!doc.is_null()) {
        if (doc.is_array()) return doc.get<std::vector<double>>();
        require_fields(doc, {"min", "max", "bins"}, "bin_grid");
        const double lo = doc.value("min", 0.0);
        const double hi = doc.at("max").get<double>();
        const long bins = doc.value("bins", 50L);
        if (!(hi > lo) || bins < 1) throw ConfigError("bin_grid needs max > min and bins >= 1");
        std::vector<double> edges;
        for (long i = 0; i <= bins; ++i) {
            edges.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins));
        }
        return edges;
    }
    double top = 1.0;
    for (const auto& series : data) {
        for (double v : series.values()) top = std::max(top, v);
    }
    const double hi = std::ceil(top * 1.5);
    std::vector<double> edges;
    for (long i = 0; i <= 50; ++i) {
        edges.push_back(hi * static_cast<double>(i) / 50.0);
    }
    return edges;
}

std::vector<ForecasterSpec> build_specs(const RunConfig& cfg,
                                        const std::vector<double>& default_grid) {
    static const std::set<std::string> known_families = {"seasonal_median", "holt_winters",
                                                         "seasonal_ar", "sir", "quad_growth"};
    std::vector<ForecasterSpec> specs;
    std::set<std::string> ids;
    for (const auto& entry : cfg.models) {
        require_fields(entry, {"family", "id", "hyperparameters", "bin_grid"}, "model");
        ForecasterSpec spec;
        if (!entry.contains("family")) throw ConfigError("model entry needs a 'family'");
        spec.family = entry.at("family").get<std::string>();
        if (known_families.find(spec.family) == known_families.end()) {
            throw ConfigError("unknown model family '" + spec.family + "'");
        }
        spec.id = entry.value("id", spec.family);
        if (!ids.insert(spec.id).second) {
            throw ConfigError("duplicate model id '" + spec.id + "'");
        }
        if (entry.contains("hyperparameters")) {
            for (const auto& [key, value] : entry.at("hyperparameters").items()) {
                if (!value.is_number()) {
                    throw ConfigError("hyperparameter " + key + " must be numeric");
                }
                spec.hyperparameters[key] = value.get<double>();
            }
        }
        spec.bin_grid = entry.contains("bin_grid")
                            ? entry.at("bin_grid").get<std::vector<double>>()
                            : default_grid;
        spec.seed = rng::derive(cfg.seed, "model:" + spec.id);
        specs.push_back(std::move(spec));
    }
    return specs;
}

struct EnsembleConfig {
    std::string id = "ensemble";
    std::vector<std::string> components;
    double floor = -10.0;
};

std::optional<EnsembleConfig> parse_ensemble(const json& doc,
                                             const std::vector<ForecasterSpec>& specs) {
    if (doc.is_null()) return std::nullopt;
    require_fields(doc, {"id", "components", "floor"}, "ensemble");
    EnsembleConfig ens;
    ens.id = doc.value("id", "ensemble");
    ens.floor = doc.value("floor", -10.0);
    if (!doc.contains("components") || doc.at("components").size() < 2) {
        throw ConfigError("ensemble needs at least 2 components");
    }
    for (const auto& c : doc.at("components")) {
        const std::string id = c.get<std::string>();
        const bool known = std::any_of(specs.begin(), specs.end(),
                                       [&](const ForecasterSpec& s) { return s.model_id() == id; });
        if (!known) throw ConfigError("ensemble component '" + id + "' is not a configured model");
        ens.components.push_back(id);
    }
    for (const auto& s : specs) {
        if (s.model_id() == ens.id) throw ConfigError("ensemble id collides with model id");
    }
    return ens;
}

/// Key that pairs the same forecast case across models.
std::string case_key(const TestCase& c) {
    return c.season_label + "|" + c.location + "|" + c.target.describe();
}

std::vector<io::ScoreRow> score_rows(const std::vector<TestCase>& cases, const std::string& model,
                                     const std::vector<Metric>& metrics) {
    std::vector<io::ScoreRow> rows;
    for (const auto& metric : metrics) {
        for (const auto& c : cases) {
            if (c.model_id != model) continue;
            const auto value = metric_value(metric, ForecastRepr(c.density), c.truth);
            if (!value) continue;
            rows.push_back({model, metric.name, c.location, c.target.origin_t,
                            c.target.describe(), *value});
        }
    }
    return rows;
}

struct Artifacts {
    std::string dir;
    std::string config_hash;
    json manifest_entries = json::object();

    void write(const std::string& name, const std::string& content) {
        const std::string path = dir + "/" + name;
        io::write_file(path, content);
        manifest_entries[name] = hex64(rng::fnv1a(content));
    }
};

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed_override,
            const std::string& out_override, int jobs) {
    json doc;
    RunConfig cfg = stage("load-config", [&] {
        std::string text;
        try {
            text = io::read_file(config_path);
        } catch (const DataError& e) {
            throw ConfigError(e.what());
        }
        try {
            doc = json::parse(text);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config JSON: ") + e.what());
        }
        if (seed_override) doc["seed"] = *seed_override;
        RunConfig parsed = parse_run_config(doc);
        if (!out_override.empty()) parsed.out_dir = out_override;
        return parsed;
    });
    // The hash covers the effective config: the document with any seed
    // override already applied. Output paths do not change results.
    json hashed = doc;
    hashed.erase("out");
    const std::string config_hash = hex64(rng::fnv1a(hashed.dump()));

    auto data = stage("load-data", [&] {
        auto series = io::parse_incidence_csv(io::read_file(cfg.incidence_path), cfg.cycle_length);
        if (series.empty()) throw DataError("incidence file has no rows");
        return series;
    });
    std::map<std::string, ReportingTriangle> vintages;
    if (!cfg.vintage_path.empty()) {
        vintages = stage("load-data", [&] {
            return io::parse_vintage_csv(io::read_file(cfg.vintage_path));
        });
    }
    if (cfg.nowcast_k > 0) {
        stage("nowcast-truncate", [&] {
            for (auto& series : data) series = truncate_incomplete(series, cfg.nowcast_k);
            return 0;
        });
    }

    const SplitSpec split = stage("resolve-split", [&] { return resolve_split(cfg.split, data); });
    for (const auto& series : data) {
        for (const auto& s : split.testing_seasons) {
            if (s.last > series.length()) {
                throw ConfigError("season '" + s.label + "' extends past the data for location " +
                                  series.location() +
                                  (cfg.nowcast_k > 0 ? " after nowcast truncation" : ""));
            }
        }
    }

    const auto grid = default_bin_grid(data, doc.value("bin_grid", json()));
    const auto specs = stage("build-models", [&] { return build_specs(cfg, grid); });
    const auto ensemble_cfg = parse_ensemble(cfg.ensemble, specs);

    Artifacts artifacts{cfg.out_dir, config_hash};
    std::filesystem::create_directories(cfg.out_dir);
    const std::string hash_line = "# config " + config_hash + "\n";

    // Cross-validation, one model per parallel unit.
    std::vector<CVResult> cv(specs.size());
    stage("cross-validation", [&] {
        parallel_for(specs.size(), jobs, [&](std::size_t i) {
            cv[i] = cfg.cv_protocol == "loyo" ? loyo_cv(specs[i], data, split, cfg.cv_scale)
                                              : prospective_cv(specs[i], data, split, cfg.cv_scale);
        });
        return 0;
    });
    {
        std::ostringstream table;
        table << hash_line << "model,size,fold,score\n";
        for (const auto& r : cv) {
            for (const auto& [label, score] : r.fold_scores) {
                table << r.model_id << ',' << r.size << ',' << label << ','
                      << format_double(score) << "\n";
            }
        }
        artifacts.write("cv_table.csv", table.str());
        std::ostringstream summary;
        summary << hash_line << "model,size,folds,cv_error,cv_se,failed_folds\n";
        for (const auto& r : cv) {
            summary << r.model_id << ',' << r.size << ',' << r.fold_scores.size() << ','
                    << format_double(r.cv_error) << ',' << format_double(r.cv_se) << ','
                    << r.failed_folds.size() << "\n";
            for (const auto& f : r.failed_folds) {
                std::cerr << "warning: cv fold failed for " << r.model_id << ": " << f << "\n";
            }
        }
        artifacts.write("cv_summary.csv", summary.str());
    }

    const Selection selection = stage("selection", [&] { return select_models(cv, cfg.band); });
    {
        json sel;
        sel["config"] = config_hash;
        sel["band"] = cfg.band == SelectionBand::StandardError ? "standard_error"
                                                               : "standard_deviation";
        sel["best"] = selection.best;
        sel["parsimonious"] = selection.parsimonious;
        json models = json::array();
        for (const auto& r : cv) {
            models.push_back({{"id", r.model_id},
                              {"size", r.size},
                              {"cv_error", r.cv_error},
                              {"cv_se", r.cv_se}});
        }
        sel["models"] = models;
        artifacts.write("selected.json", sel.dump(2) + "\n");
    }

    // Prospective evaluation with audited data access.
    RollingOutcome outcome =
        stage("rolling-test", [&] { return rolling_origin_test(specs, data, split); });
    for (const auto& failure : outcome.failures) {
        std::cerr << "warning: test fit failed: " << failure << "\n";
    }
    if (!outcome.audit_clean) {
        throw std::runtime_error("stage rolling-test failed: data-access audit found a read at or "
                                 "after a forecast's target season");
    }

    std::vector<TestCase> all_cases = outcome.cases;
    std::optional<WeightTraining> weights;
    if (ensemble_cfg) {
        stage("ensemble", [&] {
            // Train weights on the cross-validation forecasts of the
            // component models, aligned case by case.
            std::vector<ForecasterSpec> component_specs;
            for (const auto& id : ensemble_cfg->components) {
                for (const auto& s : specs) {
                    if (s.model_id() == id) component_specs.push_back(s);
                }
            }
            std::vector<CVForecasts> component_cv(component_specs.size());
            parallel_for(component_specs.size(), jobs, [&](std::size_t i) {
                component_cv[i] = loyo_forecasts(component_specs[i], data, split);
            });
            std::map<std::string, std::vector<std::size_t>> positions;
            for (std::size_t c = 0; c < component_cv.size(); ++c) {
                for (std::size_t i = 0; i < component_cv[c].cases.size(); ++i) {
                    const auto& cc = component_cv[c].cases[i];
                    positions[cc.season_label + "|" + cc.location + "|" + cc.target.describe()]
                        .push_back(i);
                }
            }
            std::vector<std::vector<BinnedForecast>> training_cases;
            std::vector<double> truths;
            for (const auto& cc : component_cv[0].cases) {
                const auto& pos =
                    positions[cc.season_label + "|" + cc.location + "|" + cc.target.describe()];
                if (pos.size() != component_cv.size()) continue; // some component missed the fold
                std::vector<BinnedForecast> per_component;
                for (std::size_t c = 0; c < component_cv.size(); ++c) {
                    per_component.push_back(component_cv[c].cases[pos[c]].density);
                }
                training_cases.push_back(std::move(per_component));
                truths.push_back(cc.truth);
            }
            if (training_cases.empty()) {
                throw std::runtime_error("no aligned cross-validation cases to train weights on");
            }
            weights = train_weights(training_cases, truths, ensemble_cfg->floor);

            // Pool the rolling-test forecasts under the trained weights.
            std::map<std::string, std::map<std::string, const TestCase*>> by_key;
            std::vector<std::string> key_order;
            for (const auto& c : outcome.cases) {
                const auto key = case_key(c);
                if (by_key[key].empty()) key_order.push_back(key);
                by_key[key][c.model_id] = &c;
            }
            for (const auto& key : key_order) {
                const auto& group = by_key[key];
                std::vector<BinnedForecast> densities;
                for (const auto& id : ensemble_cfg->components) {
                    const auto it = group.find(id);
                    if (it == group.end()) break;
                    densities.push_back(it->second->density);
                }
                if (densities.size() != ensemble_cfg->components.size()) continue;
                const TestCase* first = group.begin()->second;
                TestCase pooled = *first;
                pooled.model_id = ensemble_cfg->id;
                pooled.density = combine(densities, weights->weights);
                all_cases.push_back(std::move(pooled));
            }
            json wj;
            wj["config"] = config_hash;
            wj["id"] = ensemble_cfg->id;
            wj["components"] = ensemble_cfg->components;
            wj["weights"] = weights->weights;
            wj["degenerate"] = weights->degenerate;
            wj["iterations"] = weights->iterations;
            wj["objective_path"] = weights->objective_path;
            artifacts.write("ensemble_weights.json", wj.dump(2) + "\n");
            return 0;
        });
    }

    stage("score", [&] {
        std::vector<std::string> model_order;
        for (const auto& s : specs) model_order.push_back(s.model_id());
        if (ensemble_cfg) model_order.push_back(ensemble_cfg->id);
        std::vector<io::ScoreRow> rows;
        for (const auto& model : model_order) {
            const auto model_rows = score_rows(all_cases, model, cfg.metrics);
            rows.insert(rows.end(), model_rows.begin(), model_rows.end());
        }
        artifacts.write("test_scores.csv", hash_line + io::score_csv(rows));

        std::string reference = cfg.rmae_reference;
        if (reference.empty()) {
            reference = specs.front().model_id();
            for (const auto& s : specs) {
                if (s.family == "seasonal_median") {
                    reference = s.model_id();
                    break;
                }
            }
        }
        try {
            const auto rmae = rmae_by_model(all_cases, reference);
            std::ostringstream out;
            out << hash_line << "model,reference,rmae\n";
            for (const auto& model : model_order) {
                const auto it = rmae.find(model);
                if (it == rmae.end()) continue;
                out << model << ',' << reference << ',' << format_double(it->second) << "\n";
            }
            artifacts.write("rmae.csv", out.str());
        } catch (const DegenerateError& e) {
            std::cerr << "warning: rmae skipped: " << e.what() << "\n";
        }

        // Fig. 3-style profile: training vs CV vs test error by model size.
        const long train_end = std::max_element(split.training_seasons.begin(),
                                                split.training_seasons.end(),
                                                [](const Season& a, const Season& b) {
                                                    return a.last < b.last;
                                                })
                                   ->last;
        const auto training = training_error(specs, data, train_end, cfg.cv_scale);
        std::ostringstream profile;
        profile << hash_line << "model,size,training_error,cv_error,test_error\n";
        for (std::size_t i = 0; i < specs.size(); ++i) {
            const std::string id = specs[i].model_id();
            const auto tr = std::find_if(training.begin(), training.end(),
                                         [&](const TrainingErrorRow& r) {
                                             return r.model_id == id;
                                         });
            const auto report = score_cases_abs_error(all_cases, id, cfg.cv_scale);
            profile << id << ',' << cv[i].size << ','
                    << (tr == training.end() ? "" : format_double(tr->training_error)) << ','
                    << format_double(cv[i].cv_error) << ','
                    << (report.n == 0 ? "" : format_double(report.aggregate)) << "\n";
        }
        artifacts.write("error_by_size.csv", profile.str());
        return 0;
    });

    if (cfg.nowcast_profile == "vintage") {
        stage("nowcast-profile", [&] {
            std::ostringstream out;
            out << hash_line << "location,delay,pi\n";
            for (const auto& [location, triangle] : vintages) {
                // Profile from events old enough to be fully matured.
                const long matured = triangle.last_event() - triangle.max_delay();
                if (matured < triangle.first_event()) continue;
                const auto profile =
                    estimate_completeness(triangle, triangle.first_event(), matured);
                for (std::size_t d = 0; d < profile.pi.size(); ++d) {
                    out << location << ',' << d << ',' << format_double(profile.pi[d]) << "\n";
                }
            }
            artifacts.write("completeness_profile.csv", out.str());
            return 0;
        });
    }

    json manifest;
    manifest["config"] = config_hash;
    manifest["seed"] = cfg.seed;
    manifest["inputs"] = {{"incidence",
                           {{"path", cfg.incidence_path},
                            {"hash", hex64(rng::fnv1a(io::read_file(cfg.incidence_path)))}}}};
    if (!cfg.vintage_path.empty()) {
        manifest["inputs"]["vintage"] = {
            {"path", cfg.vintage_path},
            {"hash", hex64(rng::fnv1a(io::read_file(cfg.vintage_path)))}};
    }
    json audit;
    audit["clean"] = outcome.audit_clean;
    for (const auto& [label, max_t] : outcome.audit_max) audit["max_read"][label] = max_t;
    manifest["audit"] = audit;
    manifest["selection"] = {{"best", selection.best}, {"parsimonious", selection.parsimonious}};
    manifest["failures"] = outcome.failures;
    manifest["artifacts"] = artifacts.manifest_entries;
    io::write_file(cfg.out_dir + "/run_manifest.json", manifest.dump(2) + "\n");

    std::cout << "run complete: " << cfg.out_dir << " (config " << config_hash << ")\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

std::string file_stem(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

int cmd_score(const std::vector<std::string>& forecast_files, const std::string& truth_path,
              const std::vector<std::string>& metric_names, long cycle_length,
              const std::string& out_path) {
    std::vector<Metric> metrics;
    for (const auto& name : metric_names) metrics.push_back(parse_metric(name));

    const auto truth_series = io::parse_incidence_csv(io::read_file(truth_path), cycle_length);
    std::map<std::string, const TimeSeries*> by_location;
    for (const auto& series : truth_series) by_location[series.location()] = &series;

    struct Paired {
        std::string model;
        Forecast forecast;
        double truth = 0.0;
    };
    std::vector<Paired> paired;
    std::vector<std::string> unmatched;
    for (const auto& path : forecast_files) {
        const std::string model = file_stem(path);
        for (auto& forecast : io::read_forecast_file(path)) {
            const auto it = by_location.find(forecast.location);
            if (it == by_location.end()) {
                unmatched.push_back(forecast.location + "|" + forecast.target.describe() +
                                    " (unknown location)");
                continue;
            }
            double truth = 0.0;
            try {
                const Realized realized = realized_target(*it->second, forecast.target);
                if (const auto* v = std::get_if<double>(&realized)) {
                    truth = *v;
                } else if (const auto* hit = std::get_if<bool>(&realized)) {
                    truth = *hit ? 1.0 : 0.0;
                } else {
                    // Peak-timing ties: score against the earliest peak index.
                    truth = static_cast<double>(std::get<std::vector<long>>(realized).front());
                }
            } catch (const std::exception& e) {
                unmatched.push_back(forecast.location + "|" + forecast.target.describe() + " (" +
                                    e.what() + ")");
                continue;
            }
            paired.push_back({model, std::move(forecast), truth});
        }
    }
    if (!unmatched.empty()) {
        std::ostringstream msg;
        msg << "forecast targets not matched by the truth file:";
        for (const auto& u : unmatched) msg << "\n  " << u;
        throw DataError(msg.str());
    }
    if (paired.empty()) throw DataError("no forecast/truth pairs to score");

    std::vector<io::ScoreRow> rows;
    for (const auto& metric : metrics) {
        for (const auto& p : paired) {
            const auto value = metric_value(metric, p.forecast.repr, p.truth);
            if (!value) continue;
            rows.push_back({p.model, metric.name, p.forecast.location, p.forecast.origin_t,
                            p.forecast.target.describe(), *value});
        }
    }
    if (rows.empty()) {
        throw ConfigError("requested metrics apply to none of the forecast representations");
    }
    const std::string csv = io::score_csv(rows);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        io::write_file(out_path, csv);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"epifor: probabilistic infectious-disease forecasting toolkit"};
    app.require_subcommand(1);

    auto* validate = app.add_subcommand("validate", "Check data files for schema violations");
    std::vector<std::string> validate_paths;
    validate->add_option("paths", validate_paths, "incidence or vintage CSV files")->required();

    auto* run = app.add_subcommand(
        "run", "Run cross-validation, model selection, and the rolling-origin test");
    std::string config_path;
    run->add_option("--config", config_path, "RunConfig JSON document")->required();
    std::uint64_t seed_value = 0;
    auto* seed_opt = run->add_option("--seed", seed_value, "override the config seed");
    std::string out_dir;
    run->add_option("--out", out_dir, "override the output directory");
    int jobs = 0;
    run->add_option("--jobs", jobs, "parallel fit/score units (default: hardware)");

    auto* score = app.add_subcommand("score", "Score forecast JSON documents against truth data");
    std::vector<std::string> forecast_files;
    score->add_option("forecasts", forecast_files, "forecast JSON files (model = file stem)")
        ->required();
    std::string truth_path;
    score->add_option("--truth", truth_path, "incidence CSV with realized values")->required();
    std::string metrics_csv = "mae,crps,log_score";
    score->add_option("--metrics", metrics_csv, "comma-separated metric names");
    long cycle_length = 1;
    score->add_option("--cycle-length", cycle_length, "season length of the truth series");
    std::string score_out;
    score->add_option("--out", score_out, "write the score CSV here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (validate->parsed()) return cmd_validate(validate_paths);
        if (run->parsed()) {
            std::optional<std::uint64_t> seed_override;
            if (seed_opt->count() > 0) seed_override = seed_value;
            return cmd_run(config_path, seed_override, out_dir, jobs);
        }
        if (score->parsed()) {
            std::vector<std::string> names;
            std::stringstream in(metrics_csv);
            std::string name;
            while (std::getline(in, name, ',')) {
                if (!name.empty()) names.push_back(name);
            }
            return cmd_score(forecast_files, truth_path, names, cycle_length, score_out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
