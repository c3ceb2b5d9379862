#pragma once

#include <stdexcept>
#include <string>

namespace metaug {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Incompatible tensor shapes or malformed dimensions.
struct ShapeError : Error {
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// An operation produced a non-finite value; the surrounding step must abort.
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Malformed input file (KEEL .dat, CSV, config).
struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Invalid experiment or method configuration.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace metaug
