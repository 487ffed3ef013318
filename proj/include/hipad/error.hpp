#pragma once

#include <stdexcept>
#include <string>

namespace hipad {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A numerical kernel could not proceed: PCG breakdown, non-positive
/// Cholesky pivot, non-finite iterate.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Invalid parameters or inputs that violate a documented precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Malformed text input. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), message_(what), line_(line)
    {
    }

    std::size_t line() const noexcept { return line_; }
    /// The message without the line suffix.
    const std::string& message() const noexcept { return message_; }

private:
    std::string message_;
    std::size_t line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// The dual solution has no support vectors, so no (w, b) can be recovered.
class DegenerateModelError : public Error {
public:
    using Error::Error;
};

} // namespace hipad
