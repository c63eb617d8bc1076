#pragma once

#include <stdexcept>
#include <string>

namespace nonresp {

// Error taxonomy used across the toolkit. The CLI maps these to exit codes:
// usage -> 1, data -> 2, numeric -> 3.

// Caller passed invalid arguments or configuration.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input data violates its schema or an I/O operation failed.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A computation produced non-finite values (divergence, overflow).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace nonresp
