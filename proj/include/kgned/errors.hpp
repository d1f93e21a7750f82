#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgned {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : Error(file + (line ? ":" + std::to_string(line) : std::string{}) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Invalid argument to an operation (bad id, out-of-range segment, ...).
class InputError : public Error {
public:
    using Error::Error;
};

/// Network failure talking to a SPARQL endpoint; the request may be retried.
class FetchError : public Error {
public:
    using Error::Error;
};

/// The endpoint answered, but not with SPARQL JSON results.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// The endpoint answered with a non-2xx status.
class EndpointError : public Error {
public:
    EndpointError(int status, const std::string& what)
        : Error("HTTP " + std::to_string(status) + ": " + what), status_(status) {}

    int status() const noexcept { return status_; }

private:
    int status_;
};

class CheckpointError : public Error {
public:
    using Error::Error;
};

/// Training diverged (non-finite loss).
class TrainingAborted : public Error {
public:
    using Error::Error;
};

}  // namespace kgned
