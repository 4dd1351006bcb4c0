#pragma once

#include <stdexcept>
#include <string>

namespace rhomax {

// Malformed user input: bad config files, out-of-range parameters,
// incompatible partition/model combinations.  The CLI maps this to exit 4.
struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A computed object violates a property it is required to satisfy
// (column sums off, missing diagonal dominance where demanded, ...).
// The CLI maps this to exit 2.
struct property_violation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative routine exhausted its budget before reaching tolerance
// (root brackets, fixed-point iterations, adaptive quadrature depth).
// The CLI maps this to exit 3.
struct non_convergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The requested operation is not defined for the given representation,
// e.g. pointwise evaluation of a sample-only density.  CLI exit 2.
struct unsupported_operation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace rhomax
