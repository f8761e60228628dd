#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hcv/config.hpp"
#include "hcv/flow_field.hpp"
#include "hcv/image.hpp"
#include "hcv/memory.hpp"

namespace hcv {

struct EstimateResult {
    FlowField flow;                     // level 1, image extents
    FlowField init;                     // level 16
    std::vector<FlowField> iterations;  // level 8
    std::vector<std::pair<std::string, double>> stage_ms;
    MemoryPlan plan;
};

/// features -> Top-K volumes -> aggregation -> soft-argmax -> refinement -> x8 upsample.
EstimateResult estimate(const Image& first, const Image& second, const RunConfig& cfg);

}  // namespace hcv
