#pragma once

#include <stdexcept>
#include <string>

namespace gvcrank {

/// Base class for all gvcrank errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries 1-based row/column of the offending cell.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t row, std::size_t col)
        : Error("row " + std::to_string(row) + ", col " + std::to_string(col) + ": " + msg),
          row_(row), col_(col) {}
    std::size_t row() const { return row_; }
    std::size_t col() const { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

/// Input is syntactically valid but structurally inconsistent (dimension mismatch etc.).
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Bad configuration: unknown field, invalid option value, missing required setting.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// The same key appears more than once where uniqueness is required.
class DuplicateKeyError : public Error {
public:
    using Error::Error;
};

/// A referenced entity is missing (sector without sidecar data, unmapped sector, ...).
class CompletenessError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Linear system is singular or too close to singular to solve reliably.
class IllPosedError : public Error {
public:
    using Error::Error;
};

/// Economy primitives admit no equilibrium (non-positive expenditure denominator).
class InfeasibleEconomyError : public Error {
public:
    using Error::Error;
};

/// Estimation cannot proceed (rank deficiency beyond droppable columns, empty sample).
class EstimationError : public Error {
public:
    using Error::Error;
};

/// Iterative numerical procedure failed to converge.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Filesystem-level failure (unreadable input, unwritable output).
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace gvcrank
