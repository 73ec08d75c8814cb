#pragma once

#include <stdexcept>
#include <string>

namespace convexify {

/// Failure categories surfaced to callers and to the CLI's error JSON.
enum class ErrorKind {
    configuration,
    positivity,
    overflow,
    infeasible,
    precondition,
    unsupported,
    line_search,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) fail(kind, message);
}

}  // namespace convexify
