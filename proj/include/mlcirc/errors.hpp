#pragma once

#include <stdexcept>
#include <string>

namespace mlcirc {

// Bad arguments or malformed input files. CLI exit code 1 territory only
// when it represents a property failure; parse/usage errors map to 2.
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// A computation was refused because it exceeds a desk-scale guard
// (enumeration too large, expansion too big). CLI exit code 3.
struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

// A verified postcondition failed. This is a bug in the library, never a
// user error, and is never silently swallowed.
struct InvariantError : std::logic_error {
    explicit InvariantError(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace mlcirc
