#pragma once

#include <stdexcept>
#include <string>

namespace riskenv {

// Tolerance for identities that are exact algebra on finite trees.
inline constexpr double kExactTol = 1e-12;
// Tolerance for identities that go through transcendental functions.
inline constexpr double kSoftTol = 1e-9;

// Malformed inputs: schema violations, dimension mismatches, parameter ranges.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Computation left the representable/valid range (overflow, log of a
// non-positive inner value, degenerate anchors).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace riskenv
