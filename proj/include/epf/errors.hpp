#pragma once

#include <stdexcept>
#include <string>

namespace epf {

// Base for everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad or inconsistent input: CSV layout violations, shape mismatches,
// out-of-range indices. Maps to CLI exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

// Estimation or numerical failure: degenerate windows, singular systems,
// non-convergence. Maps to CLI exit code 3.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace epf
