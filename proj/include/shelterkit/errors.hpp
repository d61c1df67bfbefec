#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shelterkit {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input data. `line` is 1-based when the source is a line-oriented file.
struct ParseError : Error {
    ParseError(const std::string& message, std::size_t line_number)
        : Error("line " + std::to_string(line_number) + ": " + message), line(line_number) {}
    std::size_t line;
};

/// Invalid configuration (bad bounds, malformed spec file, bad flag values).
struct ConfigError : Error {
    using Error::Error;
};

/// Training failed (divergent loss, missing class, bad training set).
struct TrainingError : Error {
    using Error::Error;
};

/// Statistics requested for a client with no sleep events.
struct StatsError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace shelterkit
