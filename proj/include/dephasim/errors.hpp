#pragma once

#include <stdexcept>
#include <string>

namespace dephasim {

/// Invalid physical or reduced parameter set.
struct InvalidParams : std::runtime_error {
    explicit InvalidParams(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or unknown-key configuration input.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Adaptive quadrature could not reach the requested tolerance.
struct QuadratureFailure : std::runtime_error {
    explicit QuadratureFailure(const std::string& what) : std::runtime_error(what) {}
};

/// No quiet horizon found below the hard time cap.
struct HorizonNotFound : std::runtime_error {
    explicit HorizonNotFound(const std::string& what) : std::runtime_error(what) {}
};

/// Density matrix violates hermiticity/trace/positivity tolerances.
struct InvalidState : std::runtime_error {
    explicit InvalidState(const std::string& what) : std::runtime_error(what) {}
};

/// RK4 stability precondition (step * max rate < 0.1) violated.
struct StepTooLarge : std::runtime_error {
    explicit StepTooLarge(const std::string& what) : std::runtime_error(what) {}
};

/// Jacobi eigensolver exceeded its sweep budget.
struct EigenFailure : std::runtime_error {
    explicit EigenFailure(const std::string& what) : std::runtime_error(what) {}
};

/// CSV input does not match the expected schema.
struct SchemaMismatch : std::runtime_error {
    explicit SchemaMismatch(const std::string& what) : std::runtime_error(what) {}
};

} // namespace dephasim
