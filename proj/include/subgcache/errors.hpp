#pragma once

#include <stdexcept>
#include <string>

namespace subgcache {

// Base for all recoverable errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file (wrong header, wrong arity, bad integer, ...).
struct ParseError : Error {
    ParseError(const std::string& file, size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what) {}
};

// Structurally invalid data (dangling edge endpoint, duplicate row, ...).
struct IntegrityError : Error {
    using Error::Error;
};

// Violated operation precondition (empty member list, c > m, dim mismatch, ...).
struct DomainError : Error {
    using Error::Error;
};

// Sequence-length budget exceeded.
struct CapacityError : Error {
    using Error::Error;
};

}  // namespace subgcache
