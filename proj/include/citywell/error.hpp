#pragma once

#include <stdexcept>
#include <string>

namespace citywell {

// Bad or missing input data: unreadable files, schema violations, empty joins.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: degenerate series, non-convergence, singular systems.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace citywell
