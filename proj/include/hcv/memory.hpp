#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hcv/config.hpp"

namespace hcv {

struct BufferCount {
    std::string name;
    std::int64_t elements = 0;
    std::int64_t bytes = 0;
    bool mask = false;  // elements are bits
};

/// Closed-form cost-volume storage for one method.
struct MemoryPlan {
    std::string method;  // "allpairs" or "hcv"
    std::vector<BufferCount> buffers;
    std::int64_t total_elements = 0;  // 32-bit elements; mask bits excluded
    std::int64_t total_bytes = 0;

    void add(std::string name, std::int64_t elements, std::int64_t bytes, bool mask = false);
};

/// (ceil(H/8) * ceil(W/8))^2 * sum_{i<L} 4^-i elements, 4 bytes each.
MemoryPlan count_allpairs(int image_h, int image_w, int levels = 1);

/// Top-K scores and indices, aggregated volumes, local volume and 1-bit masks.
MemoryPlan count_hcv(int image_h, int image_w, const RunConfig& cfg);

std::string format_plan(const MemoryPlan& plan);

enum class Scenario { hcv, allpairs };

struct PeakRequest {
    Scenario scenario = Scenario::hcv;
    int image_h = 256;
    int image_w = 256;
    RunConfig cfg;
    std::int64_t cap_bytes = 0;  // 0 = uncapped
    std::uint64_t seed = 7;
};

/// Builds the scenario's volumes on a synthetic pair and returns the peak
/// live volume bytes. Throws BudgetExceeded if the cap would be crossed.
std::int64_t measure_peak(const PeakRequest& request);

}  // namespace hcv
