#pragma once
// Exception hierarchy shared by every module.
//
// Each error carries a category that the CLI maps onto its exit code:
// usage/config problems -> 1, bad input data -> 2, anything else -> 3.

#include <cstddef>
#include <stdexcept>
#include <string>

namespace entdisc {

enum class ErrorKind {
    Config,    // invalid configuration or policy parameter
    Argument,  // precondition violated by the caller
    Data,      // malformed, inconsistent or empty input data
    State,     // operation called in an invalid pipeline state
    Internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

struct ArgumentError : Error {
    explicit ArgumentError(const std::string& what) : Error(ErrorKind::Argument, what) {}
};

struct StateError : Error {
    explicit StateError(const std::string& what) : Error(ErrorKind::State, what) {}
};

struct DataError : Error {
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

// A line of an interchange file could not be parsed.
struct ParseError : DataError {
    ParseError(const std::string& file, std::size_t line, const std::string& detail)
        : DataError(file + ":" + std::to_string(line) + ": " + detail), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A record parsed but violates a type invariant.
struct SchemaError : DataError {
    using DataError::DataError;
};

struct EmptyDatasetError : DataError {
    using DataError::DataError;
};

struct TrainingError : DataError {
    using DataError::DataError;
};

struct GenerationError : DataError {
    using DataError::DataError;
};

struct EvaluationError : DataError {
    using DataError::DataError;
};

inline int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::Argument: return 1;
        case ErrorKind::Data: return 2;
        case ErrorKind::State:
        case ErrorKind::Internal: return 3;
    }
    return 3;
}

}  // namespace entdisc
