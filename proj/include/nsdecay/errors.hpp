/// Error taxonomy shared by the library and the CLI exit-code mapping.
#pragma once

#include <stdexcept>
#include <string>

namespace nsdecay {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad argument or out-of-range value detected before any computation.
struct ValidationError : Error {
    using Error::Error;
};

/// A sampling grid too coarse to represent the requested field exactly.
struct AliasingError : ValidationError {
    using ValidationError::ValidationError;
};

/// Coefficient data longer than the truncation; never silently dropped.
struct TruncationError : ValidationError {
    using ValidationError::ValidationError;
};

/// Division by a quantity that is zero for this input (e.g. b(t)=0, g=0).
struct DivisionError : ValidationError {
    using ValidationError::ValidationError;
};

/// Non-finite state encountered while time stepping.
struct BlowupError : Error {
    double t_reached;
    explicit BlowupError(double t, const std::string& what)
        : Error(what), t_reached(t) {}
};

/// A runtime invariant (dominance, Gronwall ceiling, ...) failed.
struct InvariantError : Error {
    using Error::Error;
};

}  // namespace nsdecay
