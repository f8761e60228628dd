#pragma once

#include <cstdint>
#include <functional>

namespace hcv {

/// Worker count used by parallel_for. Defaults to 1.
int num_threads();
void set_num_threads(int n);

/// Runs body(i) for i in [begin, end), split into contiguous chunks across
/// workers. Each index is visited exactly once; callers keep per-index work
/// independent so results do not depend on the worker count.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& body);

}  // namespace hcv
