// Error taxonomy shared across the library. The CLI maps these to exit codes.
#ifndef NETCAUSE_ERRORS_HPP
#define NETCAUSE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace netcause {

// Malformed or inconsistent input data (bad ids, missing values, misaligned files).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A model fit could not be produced (rank deficiency, too few observations).
class FitError : public std::runtime_error {
public:
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown after fitting (singular sandwich bread, PSD violation).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration (unknown scenario names, empty estimator set).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace netcause

#endif
