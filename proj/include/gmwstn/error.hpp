#pragma once

#include <stdexcept>
#include <string>

namespace gmwstn {

/// Base class for all library errors. Each subclass carries the process exit
/// code the command-line tool reports for it.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

/// Invalid parameters or configuration (bad β/γ, degenerate sizes, bad flags).
class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

/// Unreadable, truncated, or inconsistent input data.
class DataError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// Non-finite values or solver breakdown.
class NumericError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

}  // namespace gmwstn
