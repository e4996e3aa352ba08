#pragma once

#include <stdexcept>
#include <string>

namespace tvvar {

// Error taxonomy. The CLI maps each family onto an exit code:
// ParameterError -> 2, DataError -> 3, NumericalError -> 4.

class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed file (ragged rows, empty file, bad magic).
class FormatError : public DataError {
public:
    using DataError::DataError;
};

// Non-numeric token at a known cell.
class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::size_t row, std::size_t col)
        : DataError(what), row_(row), col_(col) {}
    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

class SizeError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class BreakdownError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class RankError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class GenerationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace tvvar
