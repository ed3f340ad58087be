// Error types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace topodim {

// File or parse failure; the message carries the file and, when known, the row.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A computation would exceed a configured resource cap (e.g. simplex count).
class resource_limit_error : public std::runtime_error {
public:
    explicit resource_limit_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Degenerate or non-estimable statistical computation.
class estimation_error : public std::runtime_error {
public:
    explicit estimation_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace topodim
