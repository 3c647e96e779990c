#pragma once

#include <stdexcept>
#include <string>

namespace socsig {

// Bad input: malformed files, out-of-range values, violated preconditions.
// The CLI maps this to exit status 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failure inside an otherwise valid computation (non-finite loss,
// degenerate statistic). The CLI maps anything that is not a ValidationError
// to exit status 2.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace socsig
