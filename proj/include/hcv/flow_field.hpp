#pragma once

#include <cstdint>
#include <vector>

#include "hcv/tensor.hpp"

namespace hcv {

/// Two-channel displacement grid in pixels of its own level (1, 8 or 16).
struct FlowField {
    int level = 1;
    Tensor u;                         // [H, W]
    Tensor v;                         // [H, W]
    std::vector<std::uint8_t> valid;  // empty means every pixel is valid

    FlowField() = default;
    FlowField(int height, int width, int lvl, float fu = 0.0f, float fv = 0.0f)
        : level(lvl), u({height, width}, fu), v({height, width}, fv) {}

    int height() const { return static_cast<int>(u.extent(0)); }
    int width() const { return static_cast<int>(u.extent(1)); }
    bool has_mask() const { return !valid.empty(); }
    bool is_valid(int y, int x) const {
        return valid.empty() || valid[static_cast<std::size_t>(y) * width() + x] != 0;
    }

    friend bool operator==(const FlowField&, const FlowField&) = default;
};

}  // namespace hcv
