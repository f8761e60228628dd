#pragma once

#include <cstdint>
#include <ostream>

namespace hcv {

/// Randomised equivalence checks of the Top-K, local and aggregation paths
/// against brute-force references. Writes one line per suite; returns true if
/// all pass.
bool run_selfcheck(std::ostream& out, std::uint64_t seed = 1234);

}  // namespace hcv
