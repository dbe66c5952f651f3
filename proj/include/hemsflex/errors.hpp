#pragma once

#include <stdexcept>
#include <string>

namespace hemsflex {

/// Invalid numeric parameter (non-positive range, bad fraction, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Structurally bad input: dimension mismatch, missing file, bad CSV/JSON.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed serialized model. The message carries the offending location.
class ParseError : public InputError {
public:
    using InputError::InputError;
};

/// Numerical failure: factorization breakdown, solver non-convergence.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Repair requested for a trajectory that violates more than the PV rule.
class RepairError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace hemsflex
