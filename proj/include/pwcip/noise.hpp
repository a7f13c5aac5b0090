#pragma once

#include <cstdint>

#include "pwcip/forward.hpp"

namespace pwcip {

// Band-limited trigonometric noise added to the reduced boundary data, each
// component rescaled so its norm in the matching trace norm equals
// 0.9 * delta (strictly inside the stated data-error level). Smooth modes
// keep the perturbed traces inside the norms the error model measures;
// white noise has no controlled H1 trace. Deterministic per seed.
TransformedData inject_noise(const TransformedData& data, double delta, uint64_t seed,
                             int modes = 3);

}  // namespace pwcip
