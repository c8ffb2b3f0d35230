#pragma once

#include <stdexcept>
#include <string>

namespace uavad {

// Bad or inconsistent input data (missing files, malformed rows, shape
// mismatches). The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure (non-finite loss or gradient, degenerate variance).
// The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace uavad
