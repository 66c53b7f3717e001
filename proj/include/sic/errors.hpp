#pragma once

#include <stdexcept>
#include <string>

namespace sic {

/// Base of every error the library raises. The exit code is what the CLI
/// returns when the error escapes a command.
class Error : public std::runtime_error
{
public:
    Error(const std::string& what, int exit_code) : std::runtime_error(what), exit_code_(exit_code) {}
    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

/// Invalid configuration or arguments (exit code 2).
class ConfigError : public Error
{
public:
    explicit ConfigError(const std::string& what) : Error(what, 2) {}
};

/// Malformed, inconsistent or unreadable data (exit code 3).
class DataError : public Error
{
public:
    explicit DataError(const std::string& what) : Error(what, 3) {}
};

/// A structural constraint of a model or hardware configuration is violated (exit code 4).
class ConstraintViolation : public Error
{
public:
    explicit ConstraintViolation(const std::string& what) : Error(what, 4) {}
};

/// Least-squares system too ill-conditioned to solve.
class IllConditioned : public DataError
{
public:
    IllConditioned(const std::string& what, double condition_estimate)
        : DataError(what), condition_estimate_(condition_estimate)
    {}
    double condition_estimate() const noexcept { return condition_estimate_; }

private:
    double condition_estimate_;
};

} // namespace sic
