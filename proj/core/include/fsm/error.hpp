#pragma once

#include <stdexcept>
#include <string>

namespace fsm {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point has a coordinate outside its factor's range.
class InvalidPointError : public Error {
public:
    using Error::Error;
};

/// An index set is not contained in the domain it is applied to, or an id is unknown.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Two indexed families (or sets of them) were merged over overlapping domains.
class DisjointnessError : public Error {
public:
    using Error::Error;
};

/// Operands live on different factored spaces.
class SpaceMismatchError : public Error {
public:
    using Error::Error;
};

/// A value id is outside a variable's value range.
class ValueRangeError : public Error {
public:
    using Error::Error;
};

/// A size or enumeration limit was exceeded.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Malformed input while reading a model file or an expression.
class ParseError : public Error {
public:
    ParseError(const std::string& message, int line = 0, int column = 0)
        : Error(line > 0 ? std::to_string(line) + ":" + std::to_string(column) + ": " + message
                         : message),
          line_(line),
          column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace fsm
