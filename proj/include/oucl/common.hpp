#pragma once

#include <stdexcept>
#include <string>

namespace oucl {

// Error categories; the CLI maps them onto process exit codes.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input: bad config files, bad shapes, unsupported parameter values.
struct ConfigError : Error {
    using Error::Error;
};

// A structural hypothesis required by an operation does not hold
// (unstable drift matrix, rank-deficient noise matrix, vanishing overlap).
struct GateError : Error {
    using Error::Error;
};

// A numerical routine could not reach its accuracy target
// (quadrature non-convergence, overflow, degenerate fits, failed bracketing).
struct AccuracyError : Error {
    using Error::Error;
};

// An operation was called outside its supported domain
// (incompatible measure representations, unsupported sampling mode).
struct PreconditionError : Error {
    using Error::Error;
};

}  // namespace oucl
