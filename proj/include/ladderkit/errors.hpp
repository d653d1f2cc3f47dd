#pragma once

#include <stdexcept>
#include <string>

namespace ladderkit {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input and contract violations. The CLI maps these to exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, std::size_t line)
        : ValidationError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ConflictError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InsufficientDataError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NoKneeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NoOverlapError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DegenerateError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ConditioningError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class IoError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Failures while obtaining encodes. The CLI maps these to exit code 2.
class BackendError : public Error {
public:
    using Error::Error;
};

class MissingMeasurementError : public BackendError {
public:
    using BackendError::BackendError;
};

}  // namespace ladderkit
