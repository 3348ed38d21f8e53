#pragma once

#include <stdexcept>
#include <string>

namespace pcreg {

// Bad parameters / conflicting options: the CLI maps this to a usage error.
class parameter_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Mismatched vector/matrix dimensions.
class dimension_error : public parameter_error {
public:
    using parameter_error::parameter_error;
};

// Numeric failures at runtime (non-PSD covariance, degenerate systems, ...).
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// CSV ingestion failure; carries the 1-based (row, column) location.
class ingest_error : public std::runtime_error {
public:
    ingest_error(const std::string& what, long row, long col)
        : std::runtime_error(what), row(row), col(col) {}
    long row;
    long col;
};

}  // namespace pcreg
