#pragma once

#include <stdexcept>
#include <string>

namespace kgraph {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input data: unreadable files, malformed cells, series too short.
class DataError : public Error {
public:
    using Error::Error;
};

// Invalid parameters detected before any computation runs.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Failure inside one pipeline stage; what() carries the stage tag.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message)
        : Error("[" + stage + "] " + message), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

} // namespace kgraph
