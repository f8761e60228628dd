#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "hcv/refine.hpp"

namespace hcv {

struct RunConfig {
    int d_h = 0;  // 0 selects min(W16, 128)
    int d_v = 0;  // 0 selects min(H16, 128)
    int k = 8;
    int l_r = 4;
    int r_g = 3;
    int iters = 12;
    float damping = 0.8f;
    float temperature = 1.0f;
    std::string weights;  // optional HCVW file
    int threads = 0;      // 0 leaves the process setting untouched
    LocalLookup lookup = LocalLookup::recentred;

    /// Displacement range actually used for a level-16 grid of h16 x w16.
    int resolved_d_h(int w16) const;
    int resolved_d_v(int h16) const;

    /// Throws InvalidArgument if any field is out of range for the grid.
    void validate(int h16, int w16) const;

    /// Applies one `key = value` assignment. Throws InvalidArgument on an
    /// unknown key or unparsable value.
    void set(const std::string& key, const std::string& value);
};

/// Parses `key = value` lines ('#' starts a comment) on top of `base`.
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

/// ceil(a / b) for positive integers.
constexpr int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace hcv
