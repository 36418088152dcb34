#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bbt {

// Base of every error the library raises. `exit_code()` is the process exit
// status the CLI maps the error to.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 4; }
};

class IoError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }
    int exit_code() const noexcept override { return 3; }

private:
    std::size_t line_;
};

class ConflictError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

class EmptyInputError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class SizeError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class MissingDataError : public Error {
public:
    using Error::Error;
};

class DegenerateMleError : public Error {
public:
    using Error::Error;
};

class SamplingError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 5; }
};

} // namespace bbt
