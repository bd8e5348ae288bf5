#pragma once

#include <stdexcept>
#include <string>

namespace panelcast {

// Invalid argument or hyperparameter value. Maps to CLI exit code 2 when it
// originates from configuration.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data (CSV content, missing series, zero
// actuals in MAPE). CLI exit code 3.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Configuration file problems. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Model document could not be parsed or has the wrong version. CLI exit code 4.
class ModelFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace panelcast
