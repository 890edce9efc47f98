#pragma once

#include <stdexcept>
#include <string>

namespace renorm {

/// Argument outside the mathematical domain of an operation (x <= 0, Re E >= 0, ...).
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Adaptive quadrature or series refinement did not reach the requested tolerance.
class convergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A mode sum was cut before its tail estimate fell under tolerance.
class truncation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Principal matrix too close to singular to invert (E sits on or near a bound state).
class singular_matrix_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation not available for the given geometry (e.g. a spectral basis on H^2).
class unsupported_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Constants registry has no entry for the requested geometry.
class missing_constants_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace renorm
