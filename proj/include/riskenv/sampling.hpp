#pragma once

#include <random>

#include "riskenv/tree.hpp"

namespace riskenv {

using Rng = std::mt19937_64;

// Uniform leaf values in [lo, hi].
RandomVariable sample_payoff(Rng& rng, const ScenarioTree& tree,
                             double lo = -1.0, double hi = 1.0);

// Uniform node values in [lo, hi] at the given level.
Profile sample_profile(Rng& rng, const ScenarioTree& tree, int t, double lo,
                       double hi);

// Random equivalent measure change: each row sampled from [floor, 1] and
// normalized, so every probability stays strictly positive.
MeasureChange sample_equivalent_change(Rng& rng, const ScenarioTree& tree,
                                       double floor = 0.2);

}  // namespace riskenv
