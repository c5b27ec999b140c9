#pragma once

#include <iosfwd>

namespace riskenv::cli {

// Canonical example suite: one line per check, returns the failure count.
int run_selftest(std::ostream& os);

}  // namespace riskenv::cli
