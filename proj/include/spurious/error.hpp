#pragma once

#include <stdexcept>
#include <string>

namespace spurious {

// Bad input data, malformed files, degenerate training sets. CLI exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments or configuration. CLI exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace spurious
