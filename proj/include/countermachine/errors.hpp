#pragma once

#include <stdexcept>
#include <string>

namespace cfm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    DimensionMismatch(std::size_t expected, std::size_t actual)
        : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                std::to_string(actual)) {}
};

class MalformedModel : public Error {
public:
    using Error::Error;
};

class RuleCapExceeded : public Error {
public:
    using Error::Error;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

class TrainingDiverged : public Error {
public:
    using Error::Error;
};

class NonFiniteObjective : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DegenerateFeature : public Error {
public:
    using Error::Error;
};

class InsufficientClassRows : public Error {
public:
    using Error::Error;
};

/// CSV error carrying its 1-based line and the offending column name.
class CsvError : public Error {
public:
    CsvError(const std::string& kind, std::size_t line, std::string column, const std::string& what)
        : Error(kind + " at line " + std::to_string(line) + (column.empty() ? "" : ", column '" + column + "'") +
                ": " + what),
          line_(line),
          column_(std::move(column)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::string column_;
};

class ParseError : public CsvError {
public:
    ParseError(std::size_t line, std::string column, const std::string& what)
        : CsvError("parse error", line, std::move(column), what) {}
};

class RangeError : public CsvError {
public:
    RangeError(std::size_t line, std::string column, const std::string& what)
        : CsvError("range error", line, std::move(column), what) {}
};

}  // namespace cfm
