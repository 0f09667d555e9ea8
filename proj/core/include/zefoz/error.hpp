#pragma once

#include <stdexcept>
#include <string>

namespace zefoz {

enum class ErrorKind {
    invalid_spin,
    shape,
    hermiticity,
    configuration,
    parameter,
    degenerate_level,
    degenerate_descriptor,
    domain,
    usage,
    non_convergence,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base exception for every failure raised by the library. The kind lets
/// callers (the CLI in particular) map failures onto exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace zefoz
