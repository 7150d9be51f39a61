#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seedgrow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input record; carries the 1-based line number of the offending record.
class IngestError : public Error {
public:
    IngestError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Invalid configuration, manifest, or precondition detected before work starts.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// The labeler failed to produce a verdict. Expansion state is left untouched.
class OracleError : public Error {
public:
    using Error::Error;
};

/// Interactive labeler did not answer in time. The request can be re-issued.
class OracleTimeout : public OracleError {
public:
    using OracleError::OracleError;
};

/// A replayed verdict log does not match what the run asked for.
class ReplayDivergence : public OracleError {
public:
    ReplayDivergence(std::size_t iteration, const std::string& what)
        : OracleError("replay diverged at iteration " + std::to_string(iteration) + ": " + what),
          iteration_(iteration) {}

    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

/// Numerical failure inside the label model (non-finite gradient, dimension mismatch).
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace seedgrow
