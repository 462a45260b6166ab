#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hilfer {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Gamma evaluated at a non-positive integer.
class PoleError : public Error {
public:
    using Error::Error;
};

/// A series or iteration hit its term/iteration budget before the tolerance.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Argument outside the documented domain (orders, monotonicity, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Data sampled on one grid handed to an operation expecting another.
class GridMismatchError : public Error {
public:
    using Error::Error;
};

/// A trajectory or operator value became NaN/Inf.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// Result exceeds the representable range.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// Expression parse failure; carries the byte offset and the expected-token set.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset, std::vector<std::string> expected)
        : Error(what), offset_(offset), expected_(std::move(expected)) {}

    std::size_t offset() const { return offset_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

/// Expression evaluation failure (division by zero, unbound variable, non-finite result).
class EvalError : public Error {
public:
    using Error::Error;
};

} // namespace hilfer
