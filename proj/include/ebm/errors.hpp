#pragma once

#include <stdexcept>
#include <string>

namespace ebm {

/// Parameter domain violation (bad omega/mu/f0/lambda, bad epsilon, ...).
struct InvalidParams : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Argument outside an operation's mathematical domain.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// An iteration exhausted its budget without meeting tolerance.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A root bracket with the expected sign change could not be found.
struct BracketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The requested equilibrium branch does not exist at this lambda.
struct NoBranch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A candidate free boundary does not satisfy the C1 matching condition.
struct TransmissionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Two fields on different grids were combined.
struct GridError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Non-finite values appeared during time stepping.
struct NumericalBlowup : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ebm
