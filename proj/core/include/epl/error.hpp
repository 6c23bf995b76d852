#pragma once

#include <stdexcept>
#include <string>

namespace epl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments, bad dimensions, non-finite inputs, unparsable files.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A solver failed to reach its tolerance or hit a degenerate system.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

class SingularMatrix : public NumericalFailure {
public:
    SingularMatrix(const std::string& what, long pivot_index, double pivot_value)
        : NumericalFailure(what), pivot_index_(pivot_index), pivot_value_(pivot_value) {}

    long pivot_index() const noexcept { return pivot_index_; }
    double pivot_value() const noexcept { return pivot_value_; }

private:
    long pivot_index_;
    double pivot_value_;
};

/// Parse failure with the 1-based line number of the offending row (0 if unknown).
class ParseError : public InvalidInput {
public:
    ParseError(const std::string& what, long line) : InvalidInput(what), line_(line) {}
    long line() const noexcept { return line_; }

private:
    long line_;
};

} // namespace epl
