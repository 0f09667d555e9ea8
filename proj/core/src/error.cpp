#include "zefoz/error.hpp"

namespace zefoz {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::invalid_spin: return "invalid-spin";
        case ErrorKind::shape: return "shape";
        case ErrorKind::hermiticity: return "hermiticity";
        case ErrorKind::configuration: return "configuration";
        case ErrorKind::parameter: return "parameter";
        case ErrorKind::degenerate_level: return "degenerate-level";
        case ErrorKind::degenerate_descriptor: return "degenerate-descriptor";
        case ErrorKind::domain: return "domain";
        case ErrorKind::usage: return "usage";
        case ErrorKind::non_convergence: return "non-convergence";
    }
    return "unknown";
}

}  // namespace zefoz
