#pragma once

#include <stdexcept>
#include <string>

namespace tcd {

enum class ErrorKind {
    invalid_argument,
    zero_probability,
    boundary_mle,
    state_explosion,
    unbounded_moment,
    grid_overflow,
    unsupported,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid argument";
        case ErrorKind::zero_probability: return "zero-probability observation";
        case ErrorKind::boundary_mle: return "boundary MLE";
        case ErrorKind::state_explosion: return "state explosion";
        case ErrorKind::unbounded_moment: return "unbounded moment";
        case ErrorKind::grid_overflow: return "grid overflow";
        case ErrorKind::unsupported: return "unsupported";
    }
    return "unknown";
}

/// Library error carrying a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool condition, const std::string& what) {
    if (!condition) throw Error(ErrorKind::invalid_argument, what);
}

}  // namespace tcd
