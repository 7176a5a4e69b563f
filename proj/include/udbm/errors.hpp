#pragma once

#include <stdexcept>
#include <string>

namespace udbm {

// User-facing data or usage problems (bad input files, invalid config).
// The CLI maps these to exit code 2; anything else is an internal error.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& msg) : std::invalid_argument(msg) {}
};

}  // namespace udbm
