#pragma once

#include <cstdint>

#include "hcv/flow_field.hpp"
#include "hcv/image.hpp"

namespace hcv {

struct SyntheticPair {
    Image first;
    Image second;
    FlowField gt;  // level 1, constant (shift_x, shift_y), masked where p + shift leaves the frame
};

/// Seeded multi-octave gray noise cropped twice from a larger canvas so that
/// second(x, y) == first(x - shift_x, y - shift_y) wherever both exist.
SyntheticPair make_synthetic_pair(int width, int height, int shift_x, int shift_y,
                                  std::uint64_t seed);

/// The texture generator alone.
Image make_noise_texture(int width, int height, std::uint64_t seed);

}  // namespace hcv
