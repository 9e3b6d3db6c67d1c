#pragma once

#include <stdexcept>
#include <string>

namespace epifor {

/// Index or range outside the data that was referenced.
class RangeError : public std::out_of_range {
public:
    explicit RangeError(const std::string& what) : std::out_of_range(what) {}
};

/// Named entity (season label, model id, metric) not found.
class LookupError : public std::out_of_range {
public:
    explicit LookupError(const std::string& what) : std::out_of_range(what) {}
};

/// Caller passed inconsistent or malformed arguments.
class ArgumentError : public std::invalid_argument {
public:
    explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

/// The requested statistic is undefined for these inputs
/// (zero reference error, zero differential variance, empty profile, ...).
class DegenerateError : public std::domain_error {
public:
    explicit DegenerateError(const std::string& what) : std::domain_error(what) {}
};

/// Model fitting could not proceed (insufficient data, bad hyperparameters).
class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

/// A forecast target lies outside the horizon a fitted model supports.
class HorizonError : public std::runtime_error {
public:
    explicit HorizonError(const std::string& what) : std::runtime_error(what) {}
};

/// Binned forecasts to be combined do not share a bin grid.
class GridError : public std::invalid_argument {
public:
    explicit GridError(const std::string& what) : std::invalid_argument(what) {}
};

/// Input files are malformed or inconsistent.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// The run configuration is invalid or incomplete.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace epifor
