#pragma once

#include <stdexcept>
#include <string>

namespace skewrnn {

/// Invalid user-supplied configuration or argument (bad dimension, unknown
/// name, malformed config file).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dimension mismatch between a state vector and a matrix or invariant.
class DimensionError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative numerical routine failed to meet its own accuracy check.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require_same_dim(std::size_t expected, std::size_t got, const char* what)
{
    if (expected != got) {
        throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                             ", got " + std::to_string(got));
    }
}

} // namespace skewrnn
