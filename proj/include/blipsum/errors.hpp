// errors.hpp — Exception types shared across the library

#pragma once

#include <stdexcept>
#include <string>

namespace blipsum {

// Bad or inconsistent run configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument outside the mathematical domain of an operation (CLI exit code 2).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical procedure failed to reach its accuracy target (CLI exit code 3).
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// A computation would exceed a configured size/effort budget (CLI exit code 4).
struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace blipsum
